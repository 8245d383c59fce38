//! Declarative experiment files.

use std::path::{Path, PathBuf};

use nnls_core::constants::Tolerances;
use nnls_core::model::PotentialSpec;
use nnls_core::solvers::SolveOptions;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    Local,
    Mp,
}

/// Which α-threshold a relative mass refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaRef {
    #[serde(rename = "alpha_V")]
    AlphaV,
    #[serde(rename = "alpha_tilde_V")]
    AlphaTildeV,
}

/// A mass given directly or as a fraction of a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Relative { fraction: f64, of: AlphaRef },
}

/// A radius given directly or as a multiple of r_α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusSpec {
    Value(f64),
    Relative { r_alpha_multiple: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub alpha: AlphaSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r: RadiusSpec,
    pub cells: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckTolerances {
    /// Relative rise allowed between consecutive homotopy levels.
    pub homotopy_slack: f64,
    /// s = 1 chain endpoint vs direct solve, relative.
    pub homotopy_endpoint: f64,
    /// Relative rise allowed between consecutive sweep energies.
    pub energy_slack: f64,
    pub whole_space_pohozaev: f64,
    /// last / median of sup u over a sweep.
    pub sup_plateau: f64,
    pub tail_quality: f64,
    /// Accepted band of residual ratios under M -> 2M.
    pub order_band: [f64; 2],
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            homotopy_slack: 1e-6,
            homotopy_endpoint: 1e-6,
            energy_slack: 1e-12,
            whole_space_pohozaev: 1e-5,
            sup_plateau: 1.5,
            tail_quality: 0.99,
            order_band: [3.5, 4.5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsTolerances {
    pub quadrature: f64,
    pub shooting: f64,
    pub eigen: f64,
}

impl Default for ConstantsTolerances {
    fn default() -> Self {
        let t = Tolerances::<f64>::default();
        Self { quadrature: t.quadrature, shooting: t.shooting, eigen: t.eigen }
    }
}

impl From<ConstantsTolerances> for Tolerances<f64> {
    fn from(t: ConstantsTolerances) -> Self {
        Self { quadrature: t.quadrature, shooting: t.shooting, eigen: t.eigen }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub constants: ConstantsTolerances,
    pub solver: SolveOptions<f64>,
    pub checks: CheckTolerances,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Radii as multiples of r_α.
    pub r_multiples: Vec<f64>,
    /// Masses of the sweep; empty means the experiment's own α.
    pub alphas: Vec<AlphaSpec>,
    pub s_grid: Vec<f64>,
}

/// Bisection for the smallest tested α with λ > 0 on the β ≤ 0 mountain-pass branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaScan {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Re-solve on 2M cells and check the identity residual ratios.
    pub order_check: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Directory for binary profiles of every solve.
    pub profiles: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec<f64>,
    pub grid: GridConfig,
    pub branch: BranchChoice,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub lambda_scan: Option<LambdaScan>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn zero_potential() -> PotentialSpec<f64> {
    PotentialSpec::Zero
}

fn invalid(path: &str, reason: impl Into<String>) -> CliError {
    CliError::ConfigInvalid { path: path.into(), reason: reason.into() }
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {x}")))
    }
}

fn increasing(path: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(invalid(path, "must be strictly increasing"))
    }
}

fn alpha_key(a: &AlphaSpec) -> (u8, f64) {
    match a {
        AlphaSpec::Value(x) => (0, *x),
        AlphaSpec::Relative { fraction, of } => (1 + *of as u8, *fraction),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Field-level checks; parameter admissibility and regimes are checked on resolution.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.params.alpha {
            AlphaSpec::Value(a) => positive("params.alpha", a)?,
            AlphaSpec::Relative { fraction, .. } => positive("params.alpha.fraction", fraction)?,
        }
        match self.grid.r {
            RadiusSpec::Value(r) => positive("grid.r", r)?,
            RadiusSpec::Relative { r_alpha_multiple } => {
                if !(r_alpha_multiple > 1.0 && r_alpha_multiple.is_finite()) {
                    return Err(invalid("grid.r.r_alpha_multiple", "must exceed 1"));
                }
            }
        }
        if self.grid.cells < 16 {
            return Err(invalid("grid.cells", "at least 16 cells"));
        }
        let c = &self.tolerances.constants;
        positive("tolerances.constants.quadrature", c.quadrature)?;
        positive("tolerances.constants.shooting", c.shooting)?;
        positive("tolerances.constants.eigen", c.eigen)?;
        let s = &self.tolerances.solver;
        for (name, x) in [
            ("tol_res_rel", s.tol_res_rel),
            ("tol_mass", s.tol_mass),
            ("tol_poh", s.tol_poh),
            ("descent_dt", s.descent_dt),
            ("newton_switch", s.newton_switch),
            ("string_tol", s.string_tol),
            ("trust_margin", s.trust_margin),
            ("sandwich_slack", s.sandwich_slack),
            ("tail_floor", s.tail_floor),
            ("bump_threshold", s.bump_threshold),
        ] {
            positive(&format!("tolerances.solver.{name}"), x)?;
        }
        if let Some(rc) = s.refine_cells {
            if rc < 16 {
                return Err(invalid("tolerances.solver.refine_cells", "at least 16 cells"));
            }
        }
        let k = &self.tolerances.checks;
        for (name, x) in [
            ("homotopy_slack", k.homotopy_slack),
            ("homotopy_endpoint", k.homotopy_endpoint),
            ("energy_slack", k.energy_slack),
            ("whole_space_pohozaev", k.whole_space_pohozaev),
            ("sup_plateau", k.sup_plateau),
            ("tail_quality", k.tail_quality),
            ("order_band[0]", k.order_band[0]),
        ] {
            positive(&format!("tolerances.checks.{name}"), x)?;
        }
        if !(k.order_band[0] < k.order_band[1]) {
            return Err(invalid("tolerances.checks.order_band", "lower end must be below upper end"));
        }
        increasing("sweep.r_multiples", &self.sweep.r_multiples)?;
        if let Some(m) = self.sweep.r_multiples.first() {
            if *m <= 1.0 {
                return Err(invalid("sweep.r_multiples", "radii must exceed r_alpha"));
            }
        }
        let keys: Vec<(u8, f64)> = self.sweep.alphas.iter().map(alpha_key).collect();
        if !keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)) {
            return Err(invalid("sweep.alphas", "must be strictly increasing (absolute masses first)"));
        }
        for (i, a) in self.sweep.alphas.iter().enumerate() {
            positive(&format!("sweep.alphas[{i}]"), alpha_key(a).1)?;
        }
        increasing("sweep.s_grid", &self.sweep.s_grid)?;
        if let (Some(first), Some(last)) = (self.sweep.s_grid.first(), self.sweep.s_grid.last()) {
            if *first < 0.5 || *last != 1.0 {
                return Err(invalid("sweep.s_grid", "must lie in [0.5, 1] and end at 1"));
            }
        }
        if let Some(scan) = &self.lambda_scan {
            positive("lambda_scan.alpha_lo", scan.alpha_lo)?;
            if !(scan.alpha_lo < scan.alpha_hi) {
                return Err(invalid("lambda_scan.alpha_hi", "must exceed alpha_lo"));
            }
            if scan.steps == 0 {
                return Err(invalid("lambda_scan.steps", "at least one step"));
            }
        }
        Ok(())
    }
}

/// `a:b:k`, k points from a to b; `geometric` spaces them by a constant ratio.
pub fn parse_range(text: &str, geometric: bool) -> Result<Vec<f64>, CliError> {
    let bad = || invalid("<command line>", format!("expected a:b:k, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, k] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if k < 2 || !(a < b) || (geometric && a <= 0.0) {
        return Err(bad());
    }
    let last = (k - 1) as f64;
    let mut out: Vec<f64> = (0..k)
        .map(|i| {
            let t = i as f64 / last;
            if geometric {
                a * (b / a).powf(t)
            } else {
                a + (b - a) * t
            }
        })
        .collect();
    // exact endpoints, and round-off free interior points for decimal steps
    out[k - 1] = b;
    for x in &mut out {
        *x = (*x * 1e12).round() / 1e12;
    }
    Ok(out)
}
