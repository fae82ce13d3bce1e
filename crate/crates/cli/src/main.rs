use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ellshrink::Method;
use ellshrink_cli::{cmd_bench, cmd_estimate, cmd_oracle, BenchArgs, EstimateArgs, OracleArgs};

/// Shrinkage covariance estimation for elliptical data.
#[derive(Debug, Parser)]
#[command(name = "ellshrink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run Monte Carlo NMSE scenarios from a config file and write one CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        /// Override the trial count of every scenario.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Estimate a covariance matrix from a CSV data file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        /// The file stores one variable per row instead of one observation per row.
        #[arg(long)]
        transpose: bool,
    },
    /// Print the elliptical oracle shrinkage and SCM error for given parameters.
    Oracle {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Scm,
    Lw,
    Ell,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Scm => Method::Scm,
            MethodArg::Lw => Method::Lw,
            MethodArg::Ell => Method::Ell,
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let result = match cli.command {
        Command::Bench {
            config,
            out,
            workers,
            trials,
        } => cmd_bench(
            &BenchArgs {
                config,
                out,
                workers,
                trials,
            },
            &mut stdout,
        ),
        Command::Estimate {
            data,
            method,
            out,
            transpose,
        } => cmd_estimate(
            &EstimateArgs {
                data,
                method: method.into(),
                out,
                transpose,
            },
            &mut stdout,
        ),
        Command::Oracle {
            p,
            n,
            gamma,
            kappa,
            eta,
        } => cmd_oracle(
            &OracleArgs {
                p,
                n,
                gamma,
                kappa,
                eta,
            },
            &mut stdout,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
