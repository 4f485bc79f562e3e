//! Command-line front end.
//!
//! Every subcommand prints a one-line JSON summary to standard output.
//! Exit codes: 0 on success, 1 on a usage error (help goes to standard
//! error), 2 on a runtime error (the message names the failing module).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use coreset_core::{
    build_coreset_detailed, cost_hard, cost_soft, exhaustive_hard_optimum, fit_hard, fit_soft,
    ptas, relative_error, uniform_subsample, DivergenceSpec, FitOptions, PointSet,
    WeightedPointSet,
};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiment::{prepare_points, run_experiment, write_results_csv, write_summary_csv};
use crate::experiment::{Dataset, ExperimentConfig};
use crate::generate::{gen_gaussian_mixture, gen_poisson_mixture, GaussianParams, PoissonParams};
use crate::io::{
    load_points, load_spec, load_weighted, read_json, save_points, save_weighted, write_json,
    FitReportJson, HardModelJson, SensitivityJson, SoftModelJson, TruthJson,
};

#[derive(Debug, Parser)]
#[command(
    name = "coreset",
    version,
    about = "Coresets and clustering with mu-similar Bregman divergences",
    long_about = "Coresets and clustering with mu-similar Bregman divergences.\n\n\
        Divergences are given as JSON files such as\n  \
        {\"kind\": \"relative_entropy\", \"dim\": 3, \"lambda\": 0.5, \"nu\": 2.0}\n\
        Kinds: squared_euclidean, mahalanobis (with \"A\"), relative_entropy, itakura_saito,\n\
        harmonic and norm_like (with \"alpha\"), exponential_loss, hellinger (\"nu\" only).\n\n\
        Every randomized subcommand requires --seed."
)]
struct Cli {
    /// Log progress to standard error.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic mixture data set.
    Gen(GenArgs),
    /// Build a sensitivity-sampled coreset.
    Coreset(CoresetArgs),
    /// Draw a uniform weighted subsample.
    Uniform(UniformArgs),
    /// D²-seeded Bregman hard clustering.
    ClusterHard(ClusterArgs),
    /// D²-seeded Bregman soft clustering (EM).
    ClusterSoft(ClusterArgs),
    /// Evaluate a model's cost on a data set.
    Eval(EvalArgs),
    /// Exact hard clustering on a small set, or the coreset approximation scheme with --m.
    Oracle(OracleArgs),
    /// Run a coreset vs. uniform subsampling experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Gaussian,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Hard,
    Soft,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    seed: u64,
    /// Output points CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON file for the mixture parameters and labels.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    dirichlet_alpha: f64,
    /// Gaussian: variance of the component means.
    #[arg(long, default_value_t = 5000.0)]
    mean_var: f64,
    /// Gaussian: isotropic component variance.
    #[arg(long, default_value_t = 1.0)]
    comp_var: f64,
    /// Poisson: shape of the Gamma prior on rates.
    #[arg(long, default_value_t = 10.0)]
    gamma_shape: f64,
    /// Poisson: rate of the Gamma prior on rates.
    #[arg(long, default_value_t = 1e-3)]
    gamma_rate: f64,
}

/// Input points plus preprocessing.
#[derive(Debug, Args)]
struct InputArgs {
    /// Input CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Clamp coordinates into the divergence's box domain.
    #[arg(long)]
    clamp: bool,
    /// Standardize every column to zero mean and unit variance.
    #[arg(long)]
    standardize: bool,
}

#[derive(Debug, Args)]
struct CoresetArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Divergence spec JSON.
    #[arg(long)]
    divergence: PathBuf,
    #[arg(long)]
    k: usize,
    /// Number of draws.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Seeding runs for the bicriteria solution; the cheapest is kept.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Output weighted CSV (a `.meta.json` sidecar is written next to it).
    #[arg(long)]
    out: PathBuf,
    /// Also dump the sensitivity table as JSON.
    #[arg(long)]
    sensitivities: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UniformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Input is a weighted CSV with a sidecar.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    divergence: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = FitOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = FitOptions::default().max_iter)]
    max_iter: usize,
    /// Output model JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional fit report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    divergence: PathBuf,
    #[arg(long, value_enum)]
    mode: EvalMode,
    /// Reference cost; when given the relative error is printed as well.
    #[arg(long)]
    c_full: Option<f64>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    divergence: PathBuf,
    #[arg(long)]
    k: usize,
    /// Coreset size; switches to the approximation scheme.
    #[arg(long, requires = "seed", conflicts_with = "weighted")]
    m: Option<usize>,
    /// Accuracy the coreset size was chosen for (recorded only).
    #[arg(long, default_value_t = 0.1, requires = "m")]
    eps: f64,
    #[arg(long, requires = "m")]
    seed: Option<u64>,
    /// Output model JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment config JSON. A relative dataset file path is resolved
    /// against the config's directory.
    #[arg(long)]
    config: PathBuf,
    /// Per-trial results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV; defaults to the results path with `.summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads; output is identical for any count.
    #[arg(long)]
    threads: Option<usize>,
    /// Write zeros in the timing columns.
    #[arg(long)]
    no_timing: bool,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    let _ = writeln!(err, "\n{}", Cli::command().render_help());
                    1
                }
            };
        }
    };
    let level = if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    match dispatch(cli.command) {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {e}", e.module());
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<Value> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Coreset(a) => coreset(a),
        Command::Uniform(a) => uniform(a),
        Command::ClusterHard(a) => cluster(a, EvalMode::Hard),
        Command::ClusterSoft(a) => cluster(a, EvalMode::Soft),
        Command::Eval(a) => eval(a),
        Command::Oracle(a) => oracle(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn gen(a: GenArgs) -> Result<Value> {
    let (ps, truth) = match a.kind {
        GenKind::Gaussian => gen_gaussian_mixture(
            a.seed,
            &GaussianParams {
                n: a.n,
                k: a.k,
                d: a.d,
                dirichlet_alpha: a.dirichlet_alpha,
                mean_var: a.mean_var,
                comp_var: a.comp_var,
            },
        )?,
        GenKind::Poisson => gen_poisson_mixture(
            a.seed,
            &PoissonParams {
                n: a.n,
                k: a.k,
                d: a.d,
                gamma_shape: a.gamma_shape,
                gamma_rate: a.gamma_rate,
                dirichlet_alpha: a.dirichlet_alpha,
            },
        )?,
    };
    save_points(&ps, &a.out)?;
    if let Some(path) = &a.truth {
        write_json(&TruthJson::from(&truth), path)?;
    }
    Ok(json!({"command": "gen", "n": ps.len(), "d": ps.dim(), "out": a.out}))
}

fn load_prepared(input: &InputArgs, spec: &DivergenceSpec) -> Result<PointSet> {
    prepare_points(load_points(&input.input)?, spec, input.standardize, input.clamp)
}

/// Loads plain or weighted input; plain points get unit weights.
fn load_input(input: &InputArgs, weighted: bool, spec: &DivergenceSpec) -> Result<WeightedPointSet> {
    if !weighted {
        return Ok(WeightedPointSet::unit(load_prepared(input, spec)?));
    }
    let ws = load_weighted(&input.input)?;
    if input.standardize {
        return Err(Error::Invalid(
            "--standardize applies to raw points, not weighted sets".into(),
        ));
    }
    let points = prepare_points(ws.points().clone(), spec, false, input.clamp)?;
    Ok(WeightedPointSet::new(points, ws.weights().to_vec(), ws.origin_n())?)
}

fn coreset(a: CoresetArgs) -> Result<Value> {
    let spec = load_spec(&a.divergence)?;
    let ps = load_prepared(&a.input, &spec)?;
    let cs = build_coreset_detailed(&ps, a.k, a.m, spec.metric(), a.runs, a.seed)?;
    save_weighted(&cs.set, &a.out)?;
    if let Some(path) = &a.sensitivities {
        write_json(&SensitivityJson::from(&cs.sensitivities), path)?;
    }
    Ok(json!({
        "command": "coreset",
        "rows": cs.set.len(),
        "total_weight": cs.set.total_weight(),
        "origin_n": cs.set.origin_n(),
        "bicriteria_cost": cs.bicriteria.cost,
        "out": a.out,
    }))
}

fn uniform(a: UniformArgs) -> Result<Value> {
    let mut ps = load_points(&a.input)?;
    if a.standardize {
        ps = ps.standardize();
    }
    let ws = uniform_subsample(&ps, a.m, a.seed)?;
    save_weighted(&ws, &a.out)?;
    Ok(json!({
        "command": "uniform",
        "rows": ws.len(),
        "total_weight": ws.total_weight(),
        "origin_n": ws.origin_n(),
        "out": a.out,
    }))
}

fn cluster(a: ClusterArgs, mode: EvalMode) -> Result<Value> {
    let spec = load_spec(&a.divergence)?;
    let ws = load_input(&a.input, a.weighted, &spec)?;
    let opts = FitOptions {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let (name, cost, report) = match mode {
        EvalMode::Hard => {
            let (model, report) = fit_hard(&spec, &ws, a.k, a.seed, opts)?;
            write_json(&HardModelJson::from_model(&model), &a.out)?;
            ("cluster-hard", cost_hard(&spec, &ws, &model)?, report)
        }
        EvalMode::Soft => {
            let (model, report) = fit_soft(&spec, &ws, a.k, a.seed, opts)?;
            write_json(&SoftModelJson::from_model(&model), &a.out)?;
            ("cluster-soft", cost_soft(&spec, &ws, &model)?, report)
        }
    };
    if let Some(path) = &a.report {
        write_json(&FitReportJson::from(&report), path)?;
    }
    Ok(json!({
        "command": name,
        "cost": cost,
        "iterations": report.iterations,
        "converged": report.converged,
        "reseed_events": report.reseed_events,
        "out": a.out,
    }))
}

fn eval(a: EvalArgs) -> Result<Value> {
    let spec = load_spec(&a.divergence)?;
    let ws = load_input(&a.input, a.weighted, &spec)?;
    let cost = match a.mode {
        EvalMode::Hard => cost_hard(&spec, &ws, &read_json::<HardModelJson>(&a.model)?.to_model()?)?,
        EvalMode::Soft => cost_soft(&spec, &ws, &read_json::<SoftModelJson>(&a.model)?.to_model()?)?,
    };
    let mut v = json!({ "cost": cost });
    if let Some(c_full) = a.c_full {
        v["eta"] = json!(relative_error(cost, c_full)?);
    }
    Ok(v)
}

fn oracle(a: OracleArgs) -> Result<Value> {
    let spec = load_spec(&a.divergence)?;
    let ws = load_input(&a.input, a.weighted, &spec)?;
    let (model, summary_len) = match (a.m, a.seed) {
        (Some(m), Some(seed)) => {
            let out = ptas(&spec, ws.points(), a.k, a.eps, m, seed)?;
            (out.model, out.coreset_len)
        }
        _ => (exhaustive_hard_optimum(&spec, &ws, a.k)?.0, ws.merge_duplicates().len()),
    };
    let cost = cost_hard(&spec, &ws, &model)?;
    if let Some(path) = &a.out {
        write_json(&HardModelJson::from_model(&model), path)?;
    }
    Ok(json!({
        "command": "oracle",
        "cost": cost,
        "enumerated_points": summary_len,
        "centers": HardModelJson::from_model(&model).centers,
    }))
}

fn resolve_dataset(cfg: &mut ExperimentConfig, config_path: &Path) {
    if let Dataset::File(p) = &cfg.dataset {
        if p.is_relative() {
            if let Some(dir) = config_path.parent() {
                cfg.dataset = Dataset::File(dir.join(p));
            }
        }
    }
}

fn default_summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn experiment(a: ExperimentArgs) -> Result<Value> {
    let mut cfg: ExperimentConfig = read_json(&a.config)?;
    resolve_dataset(&mut cfg, &a.config);
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    if a.no_timing {
        cfg.timing = false;
    }
    let result = run_experiment(&cfg)?;
    write_results_csv(&result, create(&a.out)?)?;
    let summary_path = a.summary.unwrap_or_else(|| default_summary_path(&a.out));
    write_summary_csv(&result, create(&summary_path)?)?;
    Ok(json!({
        "command": "experiment",
        "records": result.records.len(),
        "failures": result.failures.len(),
        "c_full": result.c_full,
        "out": a.out,
        "summary": summary_path,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(
            std::iter::once("coreset").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_1() {
        let (code, out, err) = run(&["gen", "--kind", "gaussian", "--bogus"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
        let (code, _, _) = run(&["coreset", "--in", "x.csv"]);
        assert_eq!(code, 1);
        let (code, _, _) = run(&[]);
        assert_eq!(code, 1);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("experiment"));
    }

    #[test]
    fn runtime_errors_exit_2_with_module() {
        let (code, _, err) = run(&[
            "eval",
            "--in",
            "/nonexistent/x.csv",
            "--model",
            "m.json",
            "--divergence",
            "/nonexistent/se.json",
            "--mode",
            "hard",
        ]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error [data]"), "{err}");
    }
}
