use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nnls_cli::config::{parse_range, BranchChoice, ExperimentConfig, RadiusSpec, SweepConfig};
use nnls_cli::experiment::{resolve, run_experiment, run_homotopy, run_sweep, solve_at, solve_stored};
use nnls_cli::report::{exit_status, write_rows, Check, Severity};
use nnls_cli::{verify_file, CliError};
use nnls_core::constants::{cached_table, Tolerances};
use nnls_core::model::check_hypotheses;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "nnls", version)]
#[command(about = "Normalized solutions of nonlinear Schrödinger equations on balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute (or load from $NNLS_CONSTANTS_DIR) S, θ₁ and the GN constants
    Constants {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Comma-separated GN exponents.
        #[arg(long, value_delimiter = ',', default_values_t = [3.0, 5.0])]
        exponents: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold and hypothesis report for a config
    Thresholds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one configuration and store the profile with its checks
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        branch: Option<BranchChoice>,
        /// Ball radius, overriding grid.r.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuation in r over r_alpha multiples a:b:k (geometric)
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        branch: Option<BranchChoice>,
        #[arg(long)]
        r_geom: Option<String>,
        /// CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON check list.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// s-homotopy on the mountain-pass branch over a:b:k (linear)
    Homotopy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        s_grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-run every identity check on a stored solve
    Verify {
        result: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment: thresholds, solves, sweeps, verification; outputs as configured
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => nnls_cli::report::write_json(value, path),
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(checks: &[Check]) -> u8 {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        let kind = if c.severity == Severity::Hard { "FAIL" } else { "WARN" };
        let measured = c.measured.map(|m| format!(" measured {m:e}")).unwrap_or_default();
        let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
        eprintln!("{kind} {} [{}]{measured} {:?} {:?}{detail}", c.name, c.operation, c.comparison, c.tolerance);
    }
    eprintln!("{} checks, {} failed", checks.len(), failed.len());
    exit_status(checks)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Constants { n, exponents, out } => {
            let table = cached_table(n, &exponents, &Tolerances::default()).map_err(|e| CliError::Solver(e.to_string()))?;
            emit(&table, out.as_ref())?;
            Ok(0)
        }
        Command::Thresholds { config, out } => {
            let res = resolve(&ExperimentConfig::load(&config)?)?;
            let hypothesis = check_hypotheses(&res.potential, res.table.s(), &res.ctx.inputs.norms);
            #[derive(Serialize)]
            struct Out<'a> {
                alpha: f64,
                r: f64,
                thresholds: &'a nnls_core::thresholds::ThresholdReport<f64>,
                hypothesis: nnls_core::model::HypothesisReport<f64>,
            }
            emit(&Out { alpha: res.alpha, r: res.r, thresholds: &res.ctx.thresholds, hypothesis }, out.as_ref())?;
            Ok(0)
        }
        Command::Solve { config, branch, r, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(b) = branch {
                cfg.branch = b;
            }
            if let Some(r) = r {
                cfg.grid.r = RadiusSpec::Value(r);
            }
            let stored = solve_stored(&resolve(&cfg)?)?;
            emit(&stored, out.as_ref())?;
            Ok(summarize(&stored.checks))
        }
        Command::Sweep { config, branch, r_geom, out, report } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(b) = branch {
                cfg.branch = b;
            }
            if let Some(g) = r_geom {
                cfg.sweep = SweepConfig { r_multiples: parse_range(&g, true)?, ..cfg.sweep };
            }
            let res = resolve(&cfg)?;
            if res.config.sweep.r_multiples.is_empty() {
                return Err(CliError::ConfigInvalid { path: "sweep.r_multiples".into(), reason: "empty".into() });
            }
            let (rows, checks) = run_sweep(&res, &res.config.sweep.r_multiples)?;
            write_table(&rows, out.or(res.config.output.csv.clone()))?;
            if let Some(p) = report {
                nnls_cli::report::write_json(&checks, &p)?;
            }
            Ok(summarize(&checks))
        }
        Command::Homotopy { config, s_grid, out, report } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(g) = s_grid {
                cfg.sweep = SweepConfig { s_grid: parse_range(&g, false)?, ..cfg.sweep };
            }
            let res = resolve(&cfg)?;
            if res.config.sweep.s_grid.is_empty() {
                return Err(CliError::ConfigInvalid { path: "sweep.s_grid".into(), reason: "empty".into() });
            }
            let direct = solve_at(&res.ctx, res.r, &res.opts).map_err(|e| CliError::Solver(e.to_string()))?;
            let (rows, checks) = run_homotopy(&res, &res.config.sweep.s_grid, Some(&direct))?;
            write_table(&rows, out.or(res.config.output.csv.clone()))?;
            if let Some(p) = report {
                nnls_cli::report::write_json(&checks, &p)?;
            }
            Ok(summarize(&checks))
        }
        Command::Verify { result, out } => {
            let report = verify_file(&result)?;
            emit(&report, out.as_ref())?;
            Ok(summarize(&report.checks))
        }
        Command::Run { config } => {
            let report = run_experiment(&ExperimentConfig::load(&config)?)?;
            if report.config.output.report.is_none() {
                emit(&report, None)?;
            }
            Ok(summarize(&report.checks))
        }
    }
}

fn write_table(rows: &[nnls_cli::report::ResultRow], out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => nnls_cli::report::write_csv(rows, &path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_rows(rows, &mut lock)?;
            lock.flush().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
