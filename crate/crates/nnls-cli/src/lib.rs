//! Experiment files, orchestration and reports for the `nnls` command.

// `!(x > y)` is used deliberately so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod report;

use std::path::Path;

use nnls_core::solvers::evaluate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{resolve, solution_checks, StoredSolution};
use crate::report::Check;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at {path}: {reason}")]
    ConfigInvalid { path: String, reason: String },
    #[error("regime: {0}")]
    Regime(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    /// 3 for solver failures, 4 for config, regime and file errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Solver(_) => 3,
            Self::ConfigInvalid { .. } | Self::Regime(_) | Self::Io(_) => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub source: String,
    pub checks: Vec<Check>,
}

fn agreement(name: &str, stored: f64, recomputed: f64, tol: f64) -> Check {
    let scale = stored.abs().max(f64::MIN_POSITIVE);
    Check::at_most(name, "evaluate", (stored - recomputed).abs() / scale, tol)
}

/// Re-derives a stored solve from its config and profile and re-runs every identity check.
pub fn verify_stored(stored: &StoredSolution, source: &str) -> Result<VerifyReport, CliError> {
    let res = resolve(&stored.config)?;
    let again = evaluate(&res.ctx, stored.result.u.clone(), stored.result.s, &res.opts);
    let mut checks = vec![agreement("verify.alpha", stored.alpha, res.alpha, 1e-12)];
    for (name, a, b) in [
        ("verify.energy_reproduced", stored.result.energy.total, again.energy.total),
        ("verify.lambda_reproduced", stored.result.lambda, again.lambda),
    ] {
        checks.push(agreement(name, a, b, 1e-10));
    }
    checks.extend(solution_checks(&res.ctx, &again, &res.opts, "verify."));
    Ok(VerifyReport { source: source.into(), checks })
}

pub fn verify_file(path: &Path) -> Result<VerifyReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let stored: StoredSolution =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    verify_stored(&stored, &path.display().to_string())
}
