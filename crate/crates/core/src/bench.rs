//! Monte Carlo harness for NMSE comparisons of the shrinkage estimators.
//!
//! A scenario fixes a true covariance, a sampling family and a grid of sample
//! sizes. For each `n`, trial `t` draws one data matrix from stream `t` of the
//! scenario's master seed and every requested estimator is evaluated on that
//! same matrix. Per-trial results are collected in trial order and reduced
//! sequentially, so records are bit-identical for any worker count.
//!
//! # Config format
//!
//! Scenario files are TOML with one `[[scenario]]` table per scenario:
//!
//! ```toml
//! [[scenario]]
//! name = "ar1-rho0.1-t8"
//! covariance = { kind = "ar1", p = 100, rho = 0.1 }
//! # or: covariance = { kind = "spiked", spectrum = [[100.0, 30], [1.0, 40]] }
//! family = { kind = "student_t", nu = 8.0 }   # or { kind = "gaussian" }
//! n_values = [20, 40, 60, 80, 100, 120]
//! trials = 10000                                # default 10000
//! master_seed = 1                               # default 1
//! estimators = ["scm", "lw", "ell", "oracle_ell"]  # default: all four
//! lw_eta2_factor = true                         # default true
//! ```
//!
//! The environment variable `ELLSHRINK_SEED` overrides `master_seed` of every
//! scenario when set.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{CovarianceModel, DataMatrix, EllipticalSpec, Family, ShrinkageParams};
use crate::oracle::optimal_nmse;
use crate::sampling::{family_kurtosis, make_ar1, make_spiked, sample, RngStream};
use crate::shrinkage::{ell_params, lw_fit, oracle_params_elliptical, rscm, LwNormalization};
use crate::statistics::scm;

pub const SEED_ENV_VAR: &str = "ELLSHRINK_SEED";
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_MASTER_SEED: u64 = 1;

pub const CSV_HEADER: &str =
    "scenario,estimator,p,n,trials,mean_nmse,se_nmse,mean_beta,mean_alpha,oracle_nmse_bound";

/// True covariance of a scenario, built through the sampling factories.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovarianceSpec {
    Ar1 { p: usize, rho: f64 },
    Spiked { spectrum: Vec<(f64, usize)> },
}

impl CovarianceSpec {
    pub fn build(&self) -> Result<CovarianceModel> {
        match self {
            CovarianceSpec::Ar1 { p, rho } => make_ar1(*p, *rho),
            CovarianceSpec::Spiked { spectrum } => make_spiked(spectrum),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Gaussian,
    StudentT { nu: f64 },
}

impl From<FamilySpec> for Family {
    fn from(spec: FamilySpec) -> Self {
        match spec {
            FamilySpec::Gaussian => Family::Gaussian,
            FamilySpec::StudentT { nu } => Family::StudentT { nu },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Scm,
    Lw,
    Ell,
    /// RSCM with the elliptical oracle parameters of the true model.
    OracleEll,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Scm,
        EstimatorKind::Lw,
        EstimatorKind::Ell,
        EstimatorKind::OracleEll,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Scm => "scm",
            EstimatorKind::Lw => "lw",
            EstimatorKind::Ell => "ell",
            EstimatorKind::OracleEll => "oracle_ell",
        }
    }
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub covariance: CovarianceSpec,
    pub family: FamilySpec,
    pub n_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// Use the scale-invariant Ledoit-Wolf denominator (see [`LwNormalization`]).
    #[serde(default = "default_true")]
    pub lw_eta2_factor: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: String| {
            Err(Error::Config(format!(
                "scenario `{}`: field `{field}`: {msg}",
                self.name
            )))
        };
        if self.name.is_empty() || self.name.contains([',', '"', '\n', '\r']) {
            return fail(
                "name",
                "must be non-empty without commas, quotes or newlines".into(),
            );
        }
        if self.n_values.is_empty() {
            return fail("n_values", "must not be empty".into());
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return fail("n_values", format!("every n must be >= 2, got {n}"));
        }
        if self.trials == 0 {
            return fail("trials", "must be >= 1".into());
        }
        if self.estimators.is_empty() {
            return fail("estimators", "must not be empty".into());
        }
        if let Err(e) = self.covariance.build() {
            return fail("covariance", e.to_string());
        }
        if let Err(e) = Family::from(self.family).validate() {
            return fail("family", e.to_string());
        }
        Ok(())
    }

    pub fn lw_normalization(&self) -> LwNormalization {
        if self.lw_eta2_factor {
            LwNormalization::Scaled
        } else {
            LwNormalization::Unscaled
        }
    }

    pub fn elliptical_spec(&self) -> Result<EllipticalSpec> {
        EllipticalSpec::new(self.family.into(), self.covariance.build()?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    scenario: Vec<ScenarioConfig>,
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<Vec<ScenarioConfig>> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.scenario.is_empty() {
        return Err(Error::Config("no [[scenario]] tables found".into()));
    }
    for cfg in &file.scenario {
        cfg.validate()?;
    }
    Ok(file.scenario)
}

/// Reads a scenario file and applies the `ELLSHRINK_SEED` override.
pub fn load_config(path: &Path) -> Result<Vec<ScenarioConfig>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut configs = parse_config(&text)
        .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_config_prefix(e))))?;
    if let Some(seed) = seed_override()? {
        for cfg in &mut configs {
            cfg.master_seed = seed;
        }
    }
    Ok(configs)
}

fn strip_config_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// Value of `ELLSHRINK_SEED`, if set.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV_VAR}=`{raw}` is not a u64"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

/// Averaged results of one (scenario, estimator, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scenario: String,
    pub estimator: String,
    pub p: usize,
    pub n: usize,
    pub trials: u64,
    pub mean_nmse: f64,
    pub se_nmse: f64,
    pub mean_beta: f64,
    pub mean_alpha: f64,
    /// Normalized MSE of the oracle-shrunk SCM, `(gamma-1)(1-beta_o)/gamma`.
    pub oracle_nmse_bound: f64,
}

/// `||estimate - M||_F^2 / ||M||_F^2`.
pub fn nmse_sample(estimate: &DMatrix<f64>, model: &CovarianceModel) -> Result<f64> {
    let p = model.dim();
    if estimate.shape() != (p, p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            rows: estimate.nrows(),
            cols: estimate.ncols(),
        });
    }
    Ok((estimate - model.matrix()).norm_squared() / model.matrix().norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOutcome {
    pub estimator: EstimatorKind,
    pub nmse: f64,
    pub params: ShrinkageParams,
    /// Fingerprint of the data matrix this estimator was evaluated on.
    pub data_fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub outcomes: Vec<EstimatorOutcome>,
}

/// Hash of the exact bit pattern of a data matrix.
pub fn data_fingerprint(x: &DataMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    x.n().hash(&mut h);
    x.p().hash(&mut h);
    for v in x.as_matrix().iter() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Everything fixed across the trials of one (scenario, n) cell.
struct Cell<'a> {
    config: &'a ScenarioConfig,
    spec: &'a EllipticalSpec,
    n: usize,
    oracle: ShrinkageParams,
}

impl Cell<'_> {
    fn draw(&self, trial: u64) -> Result<DataMatrix> {
        sample(
            self.spec,
            self.n,
            RngStream::new(self.config.master_seed, trial),
        )
    }

    fn evaluate(&self, trial: u64) -> Result<TrialOutcome> {
        let wrap = |e: Error| Error::Trial {
            scenario: self.config.name.clone(),
            n: self.n,
            trial,
            source: Box::new(e),
        };
        let x = self.draw(trial).map_err(wrap)?;
        let fingerprint = data_fingerprint(&x);
        let model = self.spec.covariance();
        let s = scm(&x);
        let outcomes = self
            .config
            .estimators
            .iter()
            .map(|&estimator| {
                let params = match estimator {
                    EstimatorKind::Scm => ShrinkageParams::identity(),
                    EstimatorKind::Lw => lw_fit(&x, self.config.lw_normalization())?.params,
                    EstimatorKind::Ell => ell_params(&x)?,
                    EstimatorKind::OracleEll => self.oracle,
                };
                Ok(EstimatorOutcome {
                    estimator,
                    nmse: nmse_sample(&rscm(&s, params), model)?,
                    params,
                    data_fingerprint: fingerprint,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        Ok(TrialOutcome { trial, outcomes })
    }
}

fn prepare_cell<'a>(
    config: &'a ScenarioConfig,
    spec: &'a EllipticalSpec,
    n: usize,
) -> Result<Cell<'a>> {
    let kappa = family_kurtosis(spec.family());
    Ok(Cell {
        config,
        spec,
        n,
        oracle: oracle_params_elliptical(spec.covariance(), kappa, n)?,
    })
}

/// Evaluates a single trial of `config` at sample size `n`.
pub fn evaluate_trial(config: &ScenarioConfig, n: usize, trial: u64) -> Result<TrialOutcome> {
    let spec = config.elliptical_spec()?;
    prepare_cell(config, &spec, n)?.evaluate(trial)
}

/// The data matrix trial `trial` of `config` sees at sample size `n`.
pub fn draw_trial_data(config: &ScenarioConfig, n: usize, trial: u64) -> Result<DataMatrix> {
    let spec = config.elliptical_spec()?;
    sample(&spec, n, RngStream::new(config.master_seed, trial))
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut count = 0usize;
    let mut sum = KahanSum::default();
    for v in values.clone() {
        sum.add(v);
        count += 1;
    }
    let mean = sum.sum / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let mut ss = KahanSum::default();
    for v in values {
        ss.add((v - mean) * (v - mean));
    }
    let var = ss.sum / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}

fn kahan_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut count = 0usize;
    let mut sum = KahanSum::default();
    for v in values {
        sum.add(v);
        count += 1;
    }
    sum.sum / count as f64
}

/// Runs every cell of `config` on a pool of `workers` threads.
pub fn run_scenario(config: &ScenarioConfig, workers: usize) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    let spec = config.elliptical_spec()?;
    let model = spec.covariance();
    let mut records = Vec::with_capacity(config.n_values.len() * config.estimators.len());

    for &n in &config.n_values {
        let cell = prepare_cell(config, &spec, n)?;
        let bound = optimal_nmse(model, cell.oracle.beta())?;
        let trials: Vec<TrialOutcome> = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| cell.evaluate(t))
                .collect::<Result<Vec<_>>>()
        })?;

        for (slot, &estimator) in config.estimators.iter().enumerate() {
            let column = trials.iter().map(move |t| t.outcomes[slot]);
            let (mean_nmse, se_nmse) = mean_and_se(column.clone().map(|o| o.nmse));
            records.push(BenchRecord {
                scenario: config.name.clone(),
                estimator: estimator.as_str().to_string(),
                p: model.dim(),
                n,
                trials: config.trials,
                mean_nmse,
                se_nmse,
                mean_beta: kahan_mean(column.clone().map(|o| o.params.beta())),
                mean_alpha: kahan_mean(column.map(|o| o.params.alpha())),
                oracle_nmse_bound: bound,
            });
        }
    }
    Ok(records)
}

/// Runs several scenarios back to back and concatenates their records.
pub fn run_scenarios(configs: &[ScenarioConfig], workers: usize) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for cfg in configs {
        out.extend(run_scenario(cfg, workers)?);
    }
    Ok(out)
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text for `records`, sorted by (scenario, estimator, n).
pub fn to_csv_string(records: &[BenchRecord]) -> String {
    let mut sorted: Vec<&BenchRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.scenario.as_str(), a.estimator.as_str(), a.n).cmp(&(
            b.scenario.as_str(),
            b.estimator.as_str(),
            b.n,
        ))
    });
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.estimator,
            r.p,
            r.n,
            r.trials,
            fmt_real(r.mean_nmse),
            fmt_real(r.se_nmse),
            fmt_real(r.mean_beta),
            fmt_real(r.mean_alpha),
            fmt_real(r.oracle_nmse_bound),
        );
    }
    out
}

pub fn write_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(records)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses CSV produced by [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Domain(format!("unexpected CSV header: {other:?}")));
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| Error::Domain(format!("CSV line {}: bad {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad("field count"));
            }
            let real = |k: usize, name: &str| f[k].parse::<f64>().map_err(|_| bad(name));
            Ok(BenchRecord {
                scenario: f[0].to_string(),
                estimator: f[1].to_string(),
                p: f[2].parse().map_err(|_| bad("p"))?,
                n: f[3].parse().map_err(|_| bad("n"))?,
                trials: f[4].parse().map_err(|_| bad("trials"))?,
                mean_nmse: real(5, "mean_nmse")?,
                se_nmse: real(6, "se_nmse")?,
                mean_beta: real(7, "mean_beta")?,
                mean_alpha: real(8, "mean_alpha")?,
                oracle_nmse_bound: real(9, "oracle_nmse_bound")?,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}
