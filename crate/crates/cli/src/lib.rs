//! Subcommand implementations behind the `ellshrink` binary.
//!
//! Every command returns a [`CliError`] on failure; its variant decides the
//! process exit code (1 for runtime failures, 2 for usage or input errors).

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ellshrink::bench::{load_config, run_scenarios, write_csv, ScenarioConfig};
use ellshrink::oracle::scm_moments;
use ellshrink::shrinkage::{elliptical_oracle, estimate, lw_fit, LwNormalization};
use ellshrink::statistics::{eta_hat, gamma_hat_plugin, gamma_hat_sign, kappa_hat, scm};
use ellshrink::{DataMatrix, Error, Method};
use nalgebra::DMatrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, malformed input file or out-of-range argument.
    Usage(String),
    /// The input was well formed but the computation failed.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct BenchArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub workers: usize,
    /// Replaces `trials` of every scenario when set.
    pub trials: Option<u64>,
}

pub fn cmd_bench(args: &BenchArgs, log: &mut dyn Write) -> CliResult<()> {
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut configs: Vec<ScenarioConfig> = load_config(&args.config).map_err(|e| match e {
        Error::Config(_) | Error::Io { .. } => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        for cfg in &mut configs {
            cfg.trials = trials;
        }
    }
    let records =
        run_scenarios(&configs, args.workers).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_csv(&records, &args.out).map_err(|e| CliError::Runtime(e.to_string()))?;
    let _ = writeln!(
        log,
        "wrote {} records from {} scenario(s) to {}",
        records.len(),
        configs.len(),
        args.out.display()
    );
    Ok(())
}

/// A numeric data file loaded as observations x variables.
#[derive(Debug)]
pub struct LoadedData {
    pub data: DataMatrix,
    /// Whether the first line was skipped as a header.
    pub had_header: bool,
    pub transposed: bool,
}

impl LoadedData {
    /// Human-readable location of observation `row`.
    fn describe_row(&self, row: usize) -> String {
        if self.transposed {
            format!("observation {row} (column {} of the file)", row + 1)
        } else {
            let line = row + 1 + usize::from(self.had_header);
            format!("observation {row} (line {line} of the file)")
        }
    }
}

/// Reads a comma-separated numeric file. A first line with any non-numeric
/// field is treated as a header.
pub fn load_data(path: &Path, transpose: bool) -> CliResult<LoadedData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut had_header = false;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(idx + 1, |pos| pos.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(col, field)| field.parse::<f64>().map_err(|_| col))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if first.len() != values.len() {
                        return Err(CliError::Usage(format!(
                            "{}: line {line}: expected {} fields, found {}",
                            path.display(),
                            first.len(),
                            values.len()
                        )));
                    }
                }
                if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "{}: line {line}, column {}: non-finite value",
                        path.display(),
                        col + 1
                    )));
                }
                rows.push(values);
            }
            Err(_) if rows.is_empty() && !had_header => had_header = true,
            Err(col) => {
                return Err(CliError::Usage(format!(
                    "{}: line {line}, column {}: cannot parse `{}` as a number",
                    path.display(),
                    col + 1,
                    record.get(col).unwrap_or_default()
                )));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no numeric rows",
            path.display()
        )));
    }
    let (r, c) = (rows.len(), rows[0].len());
    let matrix = if transpose {
        DMatrix::from_fn(c, r, |i, j| rows[j][i])
    } else {
        DMatrix::from_fn(r, c, |i, j| rows[i][j])
    };
    let data = DataMatrix::new(matrix).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(LoadedData {
        data,
        had_header,
        transposed: transpose,
    })
}

/// Writes a matrix as comma-separated rows with 17 significant digits.
pub fn write_matrix(m: &DMatrix<f64>, path: &Path) -> CliResult<()> {
    let mut out = String::new();
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub struct EstimateArgs {
    pub data: PathBuf,
    pub method: Method,
    pub out: PathBuf,
    pub transpose: bool,
}

fn estimator_error(loaded: &LoadedData, e: Error) -> CliError {
    match e {
        Error::ZeroNormRow { row } => CliError::Runtime(format!(
            "{} has zero Euclidean norm",
            loaded.describe_row(row)
        )),
        Error::ZeroVarianceColumn { column } => CliError::Runtime(format!(
            "variable {column} (0-based) has zero second moment"
        )),
        other => CliError::Runtime(other.to_string()),
    }
}

pub fn cmd_estimate(args: &EstimateArgs, log: &mut dyn Write) -> CliResult<()> {
    let loaded = load_data(&args.data, args.transpose)?;
    let x = &loaded.data;
    let (matrix, params) = estimate(x, args.method).map_err(|e| estimator_error(&loaded, e))?;

    let s = scm(x);
    let show = |r: ellshrink::Result<f64>| match r {
        Ok(v) => fmt_real(v),
        Err(e) => format!("undefined ({})", estimator_error(&loaded, e)),
    };
    let mut lines = vec![
        format!("p = {}", x.p()),
        format!("n = {}", x.n()),
        format!("eta_hat = {}", fmt_real(eta_hat(&s))),
        format!("gamma_hat_sign = {}", show(gamma_hat_sign(x))),
        format!("gamma_hat_plugin = {}", fmt_real(gamma_hat_plugin(&s))),
        format!("kappa_hat = {}", show(kappa_hat(x))),
    ];
    if args.method == Method::Lw {
        if let Ok(fit) = lw_fit(x, LwNormalization::Scaled) {
            if fit.degenerate {
                lines.push("lw_degenerate_sphericity = true".into());
            }
        }
    }
    lines.push(format!("alpha = {}", fmt_real(params.alpha())));
    lines.push(format!("beta = {}", fmt_real(params.beta())));
    for l in lines {
        let _ = writeln!(log, "{l}");
    }
    write_matrix(&matrix, &args.out)
}

pub struct OracleArgs {
    pub p: usize,
    pub n: usize,
    pub gamma: f64,
    pub kappa: f64,
    pub eta: f64,
}

pub fn cmd_oracle(args: &OracleArgs, log: &mut dyn Write) -> CliResult<()> {
    let usage = |e: Error| CliError::Usage(e.to_string());
    let params =
        elliptical_oracle(args.eta, args.gamma, args.kappa, args.n, args.p).map_err(usage)?;
    let moments = scm_moments(args.eta, args.gamma, args.kappa, args.n, args.p).map_err(usage)?;
    let optimal_nmse = (args.gamma - 1.0) * (1.0 - params.beta()) / args.gamma;
    let _ = writeln!(log, "beta_o = {}", fmt_real(params.beta()));
    let _ = writeln!(log, "alpha_o = {}", fmt_real(params.alpha()));
    let _ = writeln!(log, "mse_scm = {}", fmt_real(moments.mse));
    let _ = writeln!(log, "nmse_scm = {}", fmt_real(moments.nmse));
    let _ = writeln!(log, "optimal_nmse = {}", fmt_real(optimal_nmse));
    Ok(())
}

/// Parses `key = value` diagnostic lines printed by the commands.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
