//! Coreset vs. uniform subsampling experiments.
//!
//! For every trial and subsample size each method builds a weighted
//! subsample, fits it (D²-seeded Lloyd or EM), and the fitted model is
//! evaluated on the full data. The relative error
//! `η = (C_ss − C_full) / C_full` is taken against `C_full`, the mean cost of
//! `trials` independent fits on the full data.
//!
//! Seeds are derived per (trial, size) and shared by both subsampling
//! methods, so trials are paired. Work runs on a rayon pool but results are
//! collected in job order; output does not depend on the thread count.

use std::path::PathBuf;
use std::time::Instant;

use coreset_core::rng::derive_seed;
use coreset_core::{
    build_coreset, cost_hard, cost_soft, fit_hard, fit_soft, relative_error, uniform_subsample,
    DivergenceSpec, FitOptions, PointSet, WeightedPointSet,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{gen_gaussian_mixture, gen_poisson_mixture, GaussianParams, PoissonParams};
use crate::io::{load_points, SpecJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Coreset,
    Uniform,
    Full,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Coreset => "coreset",
            Method::Uniform => "uniform",
            Method::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Hard,
    Soft,
}

/// Synthetic data source. Absent fields take the generator defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    Gaussian {
        n: usize,
        k: usize,
        d: usize,
        #[serde(default = "half")]
        dirichlet_alpha: f64,
        #[serde(default = "default_mean_var")]
        mean_var: f64,
        #[serde(default = "one")]
        comp_var: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Poisson {
        n: usize,
        k: usize,
        d: usize,
        #[serde(default = "default_gamma_shape")]
        gamma_shape: f64,
        #[serde(default = "default_gamma_rate")]
        gamma_rate: f64,
        #[serde(default = "half")]
        dirichlet_alpha: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn default_mean_var() -> f64 {
    5000.0
}
fn default_gamma_shape() -> f64 {
    10.0
}
fn default_gamma_rate() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    FitOptions::default().tol
}
fn default_max_iter() -> usize {
    FitOptions::default().max_iter
}
fn default_runs() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_methods() -> Vec<Method> {
    vec![Method::Coreset, Method::Uniform]
}

impl GeneratorConfig {
    /// Generates the data; `fallback_seed` is used when no seed is set.
    pub fn generate(&self, fallback_seed: u64) -> Result<PointSet> {
        match *self {
            GeneratorConfig::Gaussian {
                n,
                k,
                d,
                dirichlet_alpha,
                mean_var,
                comp_var,
                seed,
            } => {
                let p = GaussianParams {
                    n,
                    k,
                    d,
                    dirichlet_alpha,
                    mean_var,
                    comp_var,
                };
                Ok(gen_gaussian_mixture(seed.unwrap_or(fallback_seed), &p)?.0)
            }
            GeneratorConfig::Poisson {
                n,
                k,
                d,
                gamma_shape,
                gamma_rate,
                dirichlet_alpha,
                seed,
            } => {
                let p = PoissonParams {
                    n,
                    k,
                    d,
                    gamma_shape,
                    gamma_rate,
                    dirichlet_alpha,
                };
                Ok(gen_poisson_mixture(seed.unwrap_or(fallback_seed), &p)?.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Dataset {
    Generator(GeneratorConfig),
    File(PathBuf),
}

/// JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub divergence: SpecJson,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Explicit per-trial seeds; overrides derivation from `seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub mode: Mode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_runs")]
    pub bicriteria_runs: usize,
    /// When false all timing columns are written as 0 so that repeated runs
    /// produce identical files.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Clamp data into the divergence's box domain instead of rejecting it.
    #[serde(default)]
    pub clamp: bool,
    /// Standardize every column to zero mean and unit variance.
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Seeds used by one (trial, size) cell; both subsampling methods share them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub subsample: u64,
    pub fit: u64,
}

const FULL_FIT_STREAM: u64 = u64::MAX;

/// Seeds for subsampling and fitting at `size` in the trial seeded with
/// `trial_seed`.
pub fn trial_seeds(trial_seed: u64, size: usize) -> TrialSeeds {
    let base = derive_seed(trial_seed, size as u64);
    TrialSeeds {
        subsample: derive_seed(base, 0),
        fit: derive_seed(base, 1),
    }
}

/// Seed of the full-data fit of the trial seeded with `trial_seed`.
pub fn full_fit_seed(trial_seed: u64) -> u64 {
    derive_seed(trial_seed, FULL_FIT_STREAM)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Experiment(m));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.sizes.is_empty() && self.methods.iter().any(|m| *m != Method::Full) {
            return fail("sizes must not be empty".into());
        }
        if let Some(s) = self.sizes.iter().find(|s| **s < self.k) {
            return fail(format!("subsample size {s} is below k = {}", self.k));
        }
        if self.methods.is_empty() {
            return fail("methods must not be empty".into());
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.trials {
                return fail(format!(
                    "{} seeds given for {} trials",
                    seeds.len(),
                    self.trials
                ));
            }
        }
        if self.bicriteria_runs == 0 {
            return fail("bicriteria_runs must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            return fail("tol must be nonnegative".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        match &self.seeds {
            Some(s) => s[trial],
            None => derive_seed(self.seed, trial as u64),
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    /// Loads or generates the data and applies standardization and clamping.
    pub fn load_data(&self, spec: &DivergenceSpec) -> Result<PointSet> {
        let raw = match &self.dataset {
            Dataset::Generator(g) => g.generate(self.seed)?,
            Dataset::File(path) => load_points(path)?,
        };
        prepare_points(raw, spec, self.standardize, self.clamp)
    }
}

/// Standardizes and/or clamps, then checks the domain.
pub fn prepare_points(
    mut ps: PointSet,
    spec: &DivergenceSpec,
    standardize: bool,
    clamp: bool,
) -> Result<PointSet> {
    if standardize {
        ps = ps.standardize();
    }
    if clamp {
        let (clamped, count) = coreset_core::clamp_to_domain(&ps, spec);
        if count > 0 {
            log::info!("clamped {count} coordinates into the divergence domain");
        }
        ps = clamped;
    }
    ps.check_domain(spec)?;
    Ok(ps)
}

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub size: usize,
    pub trial: usize,
    pub eta: f64,
    pub subsample_seconds: f64,
    pub fit_seconds: f64,
    pub cost_ss: f64,
    pub cost_full: f64,
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub size: usize,
    pub eta_mean: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub eta_ci: f64,
    /// Mean of subsample plus fit time.
    pub half_time_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub method: Method,
    pub size: usize,
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<Failure>,
    /// Mean full-data cost over the successful full fits.
    pub c_full: f64,
    /// Cost of every full fit, `NaN` where the fit failed.
    pub full_costs: Vec<f64>,
    pub full_time_mean: f64,
    pub n: usize,
}

impl ExperimentResult {
    pub fn summary_for(&self, method: Method, size: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.size == size)
    }

    pub fn failure_count(&self, method: Method, size: usize) -> usize {
        self.failures
            .iter()
            .filter(|f| f.method == method && f.size == size)
            .count()
    }
}

/// Evaluates a hard or soft fit of `sample` on `full`.
fn fit_and_evaluate(
    spec: &DivergenceSpec,
    sample: &WeightedPointSet,
    full: &WeightedPointSet,
    k: usize,
    mode: Mode,
    seed: u64,
    opts: FitOptions,
) -> Result<f64> {
    Ok(match mode {
        Mode::Hard => {
            let (model, _) = fit_hard(spec, sample, k, seed, opts)?;
            cost_hard(spec, full, &model)?
        }
        Mode::Soft => {
            let (model, _) = fit_soft(spec, sample, k, seed, opts)?;
            cost_soft(spec, full, &model)?
        }
    })
}

/// Weighted subsample of `size` draws for `method`.
pub fn subsample(
    method: Method,
    ps: &PointSet,
    spec: &DivergenceSpec,
    k: usize,
    size: usize,
    bicriteria_runs: usize,
    seed: u64,
) -> Result<WeightedPointSet> {
    Ok(match method {
        Method::Coreset => build_coreset(ps, k, size, spec.metric(), bicriteria_runs, seed)?,
        Method::Uniform => uniform_subsample(ps, size, seed)?,
        Method::Full => WeightedPointSet::unit(ps.clone()),
    })
}

struct Timed {
    cost: f64,
    subsample_seconds: f64,
    fit_seconds: f64,
}

fn seconds(start: Instant, timing: bool) -> f64 {
    if timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

/// Runs the experiment on `ps` (already prepared) under `spec`.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    spec: &DivergenceSpec,
    ps: &PointSet,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if spec.dim() != ps.dim() {
        return Err(coreset_core::Error::DimensionMismatch {
            expected: spec.dim(),
            found: ps.dim(),
        }
        .into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Experiment(e.to_string()))?;
    let full = WeightedPointSet::unit(ps.clone());
    let opts = cfg.fit_options();
    let timing = cfg.timing;

    let full_runs: Vec<Result<Timed>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let start = Instant::now();
                let cost = fit_and_evaluate(
                    spec,
                    &full,
                    &full,
                    cfg.k,
                    cfg.mode,
                    full_fit_seed(cfg.trial_seed(t)),
                    opts,
                )?;
                Ok(Timed {
                    cost,
                    subsample_seconds: 0.0,
                    fit_seconds: seconds(start, timing),
                })
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut full_costs = Vec::with_capacity(cfg.trials);
    let mut full_times = Vec::new();
    for (t, r) in full_runs.iter().enumerate() {
        match r {
            Ok(x) => {
                full_costs.push(x.cost);
                full_times.push(x.fit_seconds);
            }
            Err(e) => {
                full_costs.push(f64::NAN);
                failures.push(Failure {
                    method: Method::Full,
                    size: ps.len(),
                    trial: t,
                    message: e.to_string(),
                });
            }
        }
    }
    let ok_full: Vec<f64> = full_costs.iter().copied().filter(|c| !c.is_nan()).collect();
    if ok_full.is_empty() {
        return Err(Error::Experiment("every full-data fit failed".into()));
    }
    let c_full = mean(&ok_full);
    if !(c_full > 0.0) {
        return Err(coreset_core::Error::NonPositiveReference(c_full).into());
    }

    let sub_methods: Vec<Method> = cfg
        .methods
        .iter()
        .copied()
        .filter(|m| *m != Method::Full)
        .collect();
    let jobs: Vec<(Method, usize, usize)> = sub_methods
        .iter()
        .flat_map(|&m| {
            cfg.sizes
                .iter()
                .flat_map(move |&s| (0..cfg.trials).map(move |t| (m, s, t)))
        })
        .collect();

    let outcomes: Vec<Result<Timed>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(method, size, t)| {
                let seeds = trial_seeds(cfg.trial_seed(t), size);
                let start = Instant::now();
                let sample = subsample(
                    method,
                    ps,
                    spec,
                    cfg.k,
                    size,
                    cfg.bicriteria_runs,
                    seeds.subsample,
                )?;
                let subsample_seconds = seconds(start, timing);
                let start = Instant::now();
                let cost = fit_and_evaluate(spec, &sample, &full, cfg.k, cfg.mode, seeds.fit, opts)?;
                Ok(Timed {
                    cost,
                    subsample_seconds,
                    fit_seconds: seconds(start, timing),
                })
            })
            .collect()
    });

    let mut records = Vec::new();
    if cfg.methods.contains(&Method::Full) {
        for (t, r) in full_runs.iter().enumerate() {
            if let Ok(x) = r {
                records.push(TrialRecord {
                    method: Method::Full,
                    size: ps.len(),
                    trial: t,
                    eta: 0.0,
                    subsample_seconds: 0.0,
                    fit_seconds: x.fit_seconds,
                    cost_ss: x.cost,
                    cost_full: c_full,
                });
            }
        }
    }
    for (&(method, size, trial), r) in jobs.iter().zip(outcomes) {
        match r.and_then(|x| Ok((relative_error(x.cost, c_full)?, x))) {
            Ok((eta, x)) => records.push(TrialRecord {
                method,
                size,
                trial,
                eta,
                subsample_seconds: x.subsample_seconds,
                fit_seconds: x.fit_seconds,
                cost_ss: x.cost,
                cost_full: c_full,
            }),
            Err(e) => failures.push(Failure {
                method,
                size,
                trial,
                message: e.to_string(),
            }),
        }
    }
    for f in &failures {
        log::warn!(
            "{} size {} trial {} failed: {}",
            f.method.name(),
            f.size,
            f.trial,
            f.message
        );
    }

    let mut keys: Vec<(Method, usize)> = Vec::new();
    for r in &records {
        if !keys.contains(&(r.method, r.size)) {
            keys.push((r.method, r.size));
        }
    }
    let summary = keys
        .into_iter()
        .map(|(method, size)| {
            let rows: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == method && r.size == size)
                .collect();
            let etas: Vec<f64> = rows.iter().map(|r| r.eta).collect();
            let times: Vec<f64> = rows
                .iter()
                .map(|r| r.subsample_seconds + r.fit_seconds)
                .collect();
            SummaryRow {
                method,
                size,
                eta_mean: mean(&etas),
                eta_ci: ci_half_width(&etas),
                half_time_mean: mean(&times),
            }
        })
        .collect();

    Ok(ExperimentResult {
        records,
        summary,
        failures,
        c_full,
        full_costs,
        full_time_mean: if full_times.is_empty() { 0.0 } else { mean(&full_times) },
        n: ps.len(),
    })
}

/// Loads the data described by `cfg` and runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = cfg.divergence.to_spec()?;
    let ps = cfg.load_data(&spec)?;
    run_experiment_on(cfg, &spec, &ps)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `1.96 · sd / √r` with the sample standard deviation; 0 for a single value.
pub fn ci_half_width(v: &[f64]) -> f64 {
    let r = v.len();
    if r < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (r - 1) as f64;
    1.96 * var.sqrt() / (r as f64).sqrt()
}

fn write_csv<T: Serialize>(rows: &[T], w: impl std::io::Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Data(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Data(e.to_string()))
}

/// Results CSV: `method,size,trial,eta,subsample_seconds,fit_seconds,cost_ss,cost_full`.
pub fn write_results_csv(result: &ExperimentResult, w: impl std::io::Write) -> Result<()> {
    write_csv(&result.records, w)
}

/// Summary CSV: `method,size,eta_mean,eta_ci,half_time_mean`.
pub fn write_summary_csv(result: &ExperimentResult, w: impl std::io::Write) -> Result<()> {
    write_csv(&result.summary, w)
}
