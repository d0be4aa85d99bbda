//! `spdc`: batch front-end for pair-rate calculations.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spdc_core::FocusFamily;

use commands::{Method, ScanSpec, UsageError, DEFAULT_XI_RANGE};
use config::{Experiment, ScanVariable, Spacing};

#[derive(Parser)]
#[command(
    name = "spdc",
    version,
    about = "Absolute SPDC pair rates for focused Gaussian beams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair rate of one configuration.
    Rate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Rate as a function of one variable, as CSV.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, value_enum)]
        variable: Option<ScanVariable>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Logarithmic spacing.
        #[arg(long)]
        log: bool,
        /// Which focal parameters follow an `xi` scan.
        #[arg(long, value_enum)]
        family: Option<Family>,
    },
    /// Revised-rate table with pass/fail per row.
    Table {
        #[command(flatten)]
        common: Common,
    },
    /// Focal parameter that maximises the closed-form rate.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        xi_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        xi_max: Option<f64>,
        #[arg(long, value_enum)]
        family: Option<Family>,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file (JSON, SI units).
    #[arg(long)]
    config: PathBuf,
    /// Write machine-readable output here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MethodArgs {
    /// Also evaluate the brute-force oracle.
    #[arg(long)]
    oracle: bool,
    /// Oracle quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Use the quadratic phase-matching path for equal signal and idler group indices.
    #[arg(long)]
    degenerate: bool,
    /// Group-velocity dispersion term, s²/m.
    #[arg(long, requires = "degenerate", allow_negative_numbers = true)]
    kappa0: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Collection,
    Pump,
    Joint,
}

impl From<Family> for FocusFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Collection => FocusFamily::Collection,
            Family::Pump => FocusFamily::Pump,
            Family::Joint => FocusFamily::Joint,
        }
    }
}

impl MethodArgs {
    fn method(&self, parallel: bool) -> Method {
        Method {
            oracle: self.oracle,
            degenerate: self.degenerate,
            kappa0: self.kappa0,
            tol: self.tol,
            parallel,
        }
    }
}

/// Size the rayon pool from `SPDC_THREADS`. Returns whether more than one thread is available.
fn configure_threads() -> Result<bool> {
    if let Ok(v) = std::env::var("SPDC_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            UsageError(format!(
                "SPDC_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot size the thread pool")?;
    }
    Ok(rayon::current_num_threads() > 1)
}

fn run(cli: Cli) -> Result<String> {
    let parallel = configure_threads()?;
    match cli.command {
        Command::Rate { common, method } => {
            let exp = Experiment::load(&common.config)?;
            commands::cmd_rate(&exp, method.method(parallel), common.out.as_deref())
        }
        Command::Scan {
            common,
            method,
            variable,
            from,
            to,
            points,
            log,
            family,
        } => {
            let exp = Experiment::load(&common.config)?;
            let run = &exp.config.run;
            let cfg = run.scan;
            let missing =
                |what: &str| UsageError(format!("scan needs --{what} or run.scan in the config"));
            let spec = ScanSpec {
                variable: variable
                    .or(cfg.map(|s| s.variable))
                    .ok_or_else(|| missing("variable"))?,
                start: from
                    .or(cfg.map(|s| s.start))
                    .ok_or_else(|| missing("from"))?,
                stop: to.or(cfg.map(|s| s.stop)).ok_or_else(|| missing("to"))?,
                points: points
                    .or(cfg.map(|s| s.points))
                    .ok_or_else(|| missing("points"))?,
                spacing: if log {
                    Spacing::Log
                } else {
                    cfg.map(|s| s.spacing).unwrap_or_default()
                },
                family: family
                    .map(Into::into)
                    .or(run.optimize.map(|o| o.family))
                    .unwrap_or_default(),
            };
            commands::cmd_scan(&exp, method.method(parallel), spec, common.out.as_deref())
        }
        Command::Table { common } => commands::cmd_table(&common.config, common.out.as_deref()),
        Command::Optimize {
            common,
            xi_min,
            xi_max,
            family,
        } => {
            let exp = Experiment::load(&common.config)?;
            let cfg = exp.config.run.optimize;
            let lo = xi_min
                .or(cfg.map(|o| o.xi_min))
                .unwrap_or(DEFAULT_XI_RANGE.0);
            let hi = xi_max
                .or(cfg.map(|o| o.xi_max))
                .unwrap_or(DEFAULT_XI_RANGE.1);
            let family = family
                .map(Into::into)
                .or(cfg.map(|o| o.family))
                .unwrap_or_default();
            commands::cmd_optimize(&exp, (lo, hi), family, common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(report.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
