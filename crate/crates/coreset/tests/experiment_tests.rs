use coreset::cli::run_cli;
use coreset::experiment::{
    run_experiment, run_experiment_on, trial_seeds, write_results_csv, write_summary_csv, Dataset,
    ExperimentConfig, GeneratorConfig, Method, Mode,
};
use coreset::io::{save_points, SpecJson};
use coreset_core::DivergenceSpec;
use serde_json::Value;

fn config(mode: Mode, methods: Vec<Method>) -> ExperimentConfig {
    ExperimentConfig {
        dataset: Dataset::Generator(GeneratorConfig::Gaussian {
            n: 1500,
            k: 4,
            d: 3,
            dirichlet_alpha: 0.5,
            mean_var: 500.0,
            comp_var: 1.0,
            seed: Some(3),
        }),
        divergence: SpecJson::from_spec(&DivergenceSpec::squared_euclidean(3)),
        k: 4,
        sizes: vec![40, 120],
        trials: 6,
        seed: 21,
        seeds: None,
        methods,
        mode,
        tol: 1e-8,
        max_iter: 200,
        bicriteria_runs: 1,
        timing: false,
        clamp: false,
        standardize: false,
        threads: Some(1),
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> (Vec<u8>, Vec<u8>) {
    let result = run_experiment(cfg).unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_results_csv(&result, &mut a).unwrap();
    write_summary_csv(&result, &mut b).unwrap();
    (a, b)
}

#[test]
fn full_method_has_zero_error() {
    for mode in [Mode::Hard, Mode::Soft] {
        let cfg = config(mode, vec![Method::Full]);
        let result = run_experiment(&cfg).unwrap();
        assert_eq!(result.records.len(), cfg.trials);
        assert!(result.failures.is_empty());
        for r in &result.records {
            assert_eq!(r.size, 1500);
            assert_eq!(r.eta, 0.0);
        }
        let row = result.summary_for(Method::Full, 1500).unwrap();
        assert_eq!((row.eta_mean, row.eta_ci), (0.0, 0.0));
    }
}

#[test]
fn reruns_and_thread_counts_give_identical_output() {
    let cfg = config(Mode::Hard, vec![Method::Coreset, Method::Uniform]);
    let first = csv_bytes(&cfg);
    assert_eq!(first, csv_bytes(&cfg));
    let mut many = cfg.clone();
    many.threads = Some(3);
    assert_eq!(first, csv_bytes(&many));

    let soft = config(Mode::Soft, vec![Method::Coreset]);
    let mut soft_many = soft.clone();
    soft_many.threads = Some(2);
    assert_eq!(csv_bytes(&soft), csv_bytes(&soft_many));
}

#[test]
fn explicit_seeds_override_derivation() {
    let mut cfg = config(Mode::Hard, vec![Method::Coreset]);
    cfg.trials = 2;
    cfg.seeds = Some(vec![5, 5]);
    let result = run_experiment(&cfg).unwrap();
    let etas: Vec<f64> = result.records.iter().filter(|r| r.size == 40).map(|r| r.eta).collect();
    assert_eq!(etas[0], etas[1]);
    cfg.seeds = Some(vec![5]);
    assert!(run_experiment(&cfg).is_err());
}

fn run(args: &[&str]) -> Value {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(std::iter::once("coreset").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{args:?}: {}", String::from_utf8_lossy(&err));
    serde_json::from_slice(&out).unwrap()
}

#[test]
fn cli_pipeline_reproduces_experiment_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let cfg = config(Mode::Hard, vec![Method::Coreset]);
    let spec = DivergenceSpec::squared_euclidean(3);
    let ps = cfg.load_data(&spec).unwrap();
    save_points(&ps, p("pts.csv")).unwrap();
    std::fs::write(p("se.json"), r#"{"kind": "squared_euclidean", "dim": 3}"#).unwrap();
    let result = run_experiment_on(&cfg, &spec, &ps).unwrap();

    let trial = 2;
    let size = 120;
    let seeds = trial_seeds(cfg.trial_seed(trial), size);
    let record = result
        .records
        .iter()
        .find(|r| r.trial == trial && r.size == size)
        .unwrap();
    let (sub, fit) = (seeds.subsample.to_string(), seeds.fit.to_string());
    run(&[
        "coreset", "--in", &p("pts.csv"), "--divergence", &p("se.json"), "--k", "4", "--m", "120",
        "--seed", &sub, "--out", &p("cs.csv"),
    ]);
    run(&[
        "cluster-hard", "--in", &p("cs.csv"), "--weighted", "--divergence", &p("se.json"), "--k",
        "4", "--seed", &fit, "--tol", "1e-8", "--max-iter", "200", "--out", &p("model.json"),
    ]);
    let c_full = result.c_full.to_string();
    let v = run(&[
        "eval", "--in", &p("pts.csv"), "--model", &p("model.json"), "--divergence", &p("se.json"),
        "--mode", "hard", "--c-full", &c_full,
    ]);
    let eta = v["eta"].as_f64().unwrap();
    assert!((eta - record.eta).abs() <= 1e-12, "cli {eta} vs experiment {}", record.eta);
}

#[test]
fn coreset_error_shrinks_with_size() {
    let mut cfg = config(Mode::Hard, vec![Method::Coreset]);
    cfg.sizes = vec![20, 80, 320];
    cfg.trials = 12;
    cfg.threads = None;
    let result = run_experiment(&cfg).unwrap();
    let rows: Vec<_> = cfg
        .sizes
        .iter()
        .map(|s| result.summary_for(Method::Coreset, *s).unwrap())
        .collect();
    for w in rows.windows(2) {
        assert!(
            w[1].eta_mean <= w[0].eta_mean + w[0].eta_ci + w[1].eta_ci,
            "size {}: {} > size {}: {}",
            w[1].size,
            w[1].eta_mean,
            w[0].size,
            w[0].eta_mean
        );
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(Mode::Hard, vec![Method::Coreset]);
    cfg.sizes = vec![2];
    assert_eq!(run_experiment(&cfg).unwrap_err().module(), "evaluation");
    let mut cfg = config(Mode::Hard, vec![Method::Coreset]);
    cfg.trials = 0;
    assert!(run_experiment(&cfg).is_err());
    let json = r#"{"dataset": {"generator": {"kind": "gaussian", "n": 10, "k": 2, "d": 2}},
        "divergence": {"kind": "squared_euclidean", "dim": 2},
        "k": 2, "sizes": [5], "trials": 1, "seed": 0, "bogus": 1}"#;
    assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());
}
