//! Run reports, named checks and CSV rows.

use std::io::Write;
use std::path::Path;

use nnls_core::constants::ConstantsTable;
use nnls_core::model::HypothesisReport;
use nnls_core::solvers::{Branch, SolveResult};
use nnls_core::thresholds::ThresholdReport;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// Identity or sign failures.
    Hard,
    /// Empirical boundedness and shape diagnostics.
    Soft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "in")]
    Within,
    #[serde(rename = "holds")]
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The operation whose output is checked.
    pub operation: String,
    pub measured: Option<f64>,
    pub comparison: Comparison,
    /// Threshold, or [lower, upper] for `in`.
    pub tolerance: Vec<f64>,
    pub severity: Severity,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &str, operation: &str, measured: Option<f64>, comparison: Comparison, tolerance: Vec<f64>, pass: bool) -> Self {
        Self {
            name: name.into(),
            operation: operation.into(),
            measured,
            comparison,
            tolerance,
            severity: Severity::Hard,
            pass,
            detail: None,
        }
    }

    pub fn at_most(name: &str, operation: &str, measured: f64, tol: f64) -> Self {
        Self::new(name, operation, Some(measured), Comparison::AtMost, vec![tol], measured <= tol)
    }

    pub fn below(name: &str, operation: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, operation, Some(measured), Comparison::Below, vec![bound], measured < bound)
    }

    pub fn above(name: &str, operation: &str, measured: f64, bound: f64) -> Self {
        Self::new(name, operation, Some(measured), Comparison::Above, vec![bound], measured > bound)
    }

    pub fn within(name: &str, operation: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, operation, Some(measured), Comparison::Within, vec![lo, hi], lo <= measured && measured <= hi)
    }

    pub fn holds(name: &str, operation: &str, pass: bool) -> Self {
        Self::new(name, operation, None, Comparison::Holds, Vec::new(), pass)
    }

    /// A failed operation, recorded as a hard check carrying the error.
    pub fn failed(name: &str, operation: &str, error: &dyn std::fmt::Display) -> Self {
        Self::holds(name, operation, false).detail(error.to_string())
    }

    pub fn soft(mut self) -> Self {
        self.severity = Severity::Soft;
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

pub const COLUMNS: [&str; 16] = [
    "r", "alpha", "beta", "s", "branch", "energy", "lambda", "mass_err", "residual", "pohozaev", "sup_u", "grad_norm_sq",
    "tail_rate", "bumps", "iterations", "converged",
];

/// One solved (or lost) point; the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub branch: String,
    pub energy: Option<f64>,
    pub lambda: Option<f64>,
    pub mass_err: Option<f64>,
    pub residual: Option<f64>,
    pub pohozaev: Option<f64>,
    pub sup_u: Option<f64>,
    pub grad_norm_sq: Option<f64>,
    pub tail_rate: Option<f64>,
    pub bumps: Option<usize>,
    pub iterations: Option<usize>,
    pub converged: bool,
}

pub fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::LocalMin => "local",
        Branch::MountainPass => "mp",
    }
}

impl ResultRow {
    pub fn from_result(res: &SolveResult<f64>, alpha: f64, beta: f64) -> Self {
        Self {
            r: res.r,
            alpha,
            beta,
            s: res.s,
            branch: branch_name(res.branch).into(),
            energy: Some(res.energy.total),
            lambda: Some(res.lambda),
            mass_err: Some(res.mass_error),
            residual: Some(res.residual_norm),
            pohozaev: Some(res.pohozaev),
            sup_u: Some(res.diagnostics.sup_u),
            grad_norm_sq: Some(res.diagnostics.grad_norm_sq),
            tail_rate: res.diagnostics.tail.map(|t| t.rate),
            bumps: Some(res.diagnostics.bumps.len()),
            iterations: Some(res.iterations),
            converged: res.converged,
        }
    }

    pub fn lost(r: f64, alpha: f64, beta: f64, s: f64, branch: Branch) -> Self {
        Self {
            r,
            alpha,
            beta,
            s,
            branch: branch_name(branch).into(),
            energy: None,
            lambda: None,
            mass_err: None,
            residual: None,
            pohozaev: None,
            sup_u: None,
            grad_norm_sq: None,
            tail_rate: None,
            bumps: None,
            iterations: None,
            converged: false,
        }
    }
}

/// Outcome of the α-bisection for λ > 0. Empirical: the smallest tested mass, not a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaScanReport {
    /// (α, λ) in the order tested.
    pub tested: Vec<(f64, f64)>,
    pub smallest_positive_alpha: Option<f64>,
    pub empirical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub nnls_version: String,
    pub constants: ConstantsTable<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The configuration after defaults and command-line overrides.
    pub config: ExperimentConfig,
    pub alpha: f64,
    pub r: f64,
    pub thresholds: ThresholdReport<f64>,
    pub hypothesis: HypothesisReport<f64>,
    pub results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_scan: Option<LambdaScanReport>,
    pub checks: Vec<Check>,
    pub environment: Environment,
}

/// Exit status: 0 all checks pass, 2 soft failures only, 3 any hard failure.
pub fn exit_status(checks: &[Check]) -> u8 {
    if checks.iter().any(|c| !c.pass && c.severity == Severity::Hard) {
        3
    } else if checks.iter().any(|c| !c.pass) {
        2
    } else {
        0
    }
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    create_parent(path)?;
    let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_rows(rows, f)
}
