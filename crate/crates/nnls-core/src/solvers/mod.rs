//! Local-minimum and mountain-pass solvers on B_r, the s-homotopy, continuation in r, and the
//! large-r limit.

mod continuation;
mod homotopy;
mod local;
mod mountain;
mod newton;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{discrete_principal_pair, ConstantsError, ConstantsTable};
use crate::model::{potential_norms_default, ModelError, RadialPotential, ValidatedParams};
use crate::radial::{
    bump_tracker, gn_quotient, tail_decay_fit, Bump, DiscreteProblem, EnergyBreakdown, Functional, GridError, PohozaevTerms,
    RadialFunction, RadialGrid, TailFit,
};
use crate::real::Real;
use crate::thresholds::{threshold_report, Regime, ThresholdError, ThresholdInputs, ThresholdReport};

pub use continuation::{continuation_in_r, rn_limit_solve, RnLimit, Sweep, SweepChecks};
pub use homotopy::s_homotopy;
pub use local::{initial_guess_local, solve_local_min};
pub use mountain::{build_mp_endpoints_and_path, solve_mountain_pass, PathState};
pub use newton::{refine, NewtonOutcome};

/// Cells of the unit-ball grid carrying v₁.
const EIGEN_CELLS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial guess outside the trust region: |grad u|^2 = {grad_norm_sq} vs cap {cap}; refine the grid")]
    OutsideTrustRegion { grad_norm_sq: f64, cap: f64 },
    #[error("descent stalled on the trust-region cap: |grad u|^2 = {grad_norm_sq} vs cap {cap}")]
    HitTrustBoundary { grad_norm_sq: f64, cap: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("path endpoint u1 has energy {0} > 0; refine the grid or enlarge r")]
    EndpointEnergyPositive(f64),
    #[error("endpoint gradient norms not separated: {start} < {level} < {end} fails")]
    EndpointsNotSeparated { start: f64, level: f64, end: f64 },
    #[error("path maximum migrated to endpoint {index}")]
    PathCollapsed { index: usize },
    #[error("saddle refinement diverged: {0}")]
    SaddleRefinementDiverged(String),
    #[error("energy {energy} outside the mountain-pass bounds [{lower}, {upper}]")]
    SandwichViolated { energy: f64, lower: f64, upper: f64 },
    #[error("level increased along the s-chain: {previous} -> {current} at s = {s}")]
    NotMonotone { s: f64, previous: f64, current: f64 },
    #[error("at s = {s}: {source}")]
    AtS { s: f64, source: Box<SolverError> },
    #[error("branch lost at r = {r}: {source}")]
    BranchLost { r: f64, source: Box<SolverError> },
    #[error("tail not decayed: u(0.9 r)/sup u = {value:e} with floor {floor:e}, or the decay is not exponential")]
    TailNotDecayed { value: f64, floor: f64 },
    #[error("tail fit failed: {0}")]
    TailFitFailed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    LocalMin,
    MountainPass,
}

/// Solver tolerances and iteration budgets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "T: Real")]
pub struct SolveOptions<T> {
    /// Cells of the working grid.
    pub cells: usize,
    /// Final Newton pass on a finer grid of the same radius.
    pub refine_cells: Option<usize>,
    /// Residual tolerance relative to 1 + ∫|∇u|².
    pub tol_res_rel: T,
    pub tol_mass: T,
    pub tol_poh: T,
    pub max_descent: usize,
    /// Initial step of the semi-implicit descent.
    pub descent_dt: T,
    /// Residual (relative, as tol_res_rel) at which descent hands over to Newton.
    pub newton_switch: T,
    pub newton_max: usize,
    pub path_points: usize,
    pub string_max_iter: usize,
    /// Relative stagnation of the path maximum that ends the string phase.
    pub string_tol: T,
    pub clip_every: usize,
    /// Relative margin below the trust-region cap.
    pub trust_margin: T,
    /// Relative slack on the energy sandwich.
    pub sandwich_slack: T,
    /// u(0.9r)/sup u below which the tail counts as decayed.
    pub tail_floor: T,
    /// Bumps lower than this fraction of sup u are ignored.
    pub bump_threshold: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            cells: 2048,
            refine_cells: None,
            tol_res_rel: T::lit(1e-8),
            tol_mass: T::lit(1e-10),
            tol_poh: T::lit(1e-6),
            max_descent: 200_000,
            descent_dt: T::one(),
            newton_switch: T::lit(1e-4),
            newton_max: 60,
            path_points: 33,
            string_max_iter: 4000,
            string_tol: T::lit(1e-9),
            clip_every: 50,
            trust_margin: T::lit(1e-6),
            sandwich_slack: T::lit(1e-8),
            tail_floor: T::lit(1e-10),
            bump_threshold: T::lit(1e-3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Diagnostics<T> {
    pub sup_u: T,
    /// ∫|∇u|².
    pub grad_norm_sq: T,
    pub tail: Option<TailFit<T>>,
    pub bumps: Vec<Bump<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveResult<T> {
    pub u: RadialFunction<T>,
    pub lambda: T,
    pub energy: EnergyBreakdown<T>,
    pub branch: Branch,
    pub s: T,
    pub r: T,
    pub residual_norm: T,
    pub tol_res: T,
    /// |ball Pohozaev residual|.
    pub pohozaev: T,
    pub pohozaev_terms: PohozaevTerms<T>,
    pub mass_error: T,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> SolveResult<T> {
    /// Re-solves by Newton on `cells` cells of the same radius, starting from the interpolated profile.
    pub fn refined(&self, ctx: &Context<T>, cells: usize, opts: &SolveOptions<T>) -> Result<Self, SolverError> {
        let grid = ctx.grid(self.r, cells)?;
        let problem = ctx.problem(grid.clone(), self.s);
        let out = refine(&problem, &self.u.resampled(grid), opts)?;
        Ok(assemble(ctx, &problem, out.u, self.branch, self.iterations + out.iterations, opts))
    }
}

/// Every reported quantity at a given profile, without iterating; `verify` re-derives stored results
/// with it.
pub fn evaluate<T: Real>(
    ctx: &Context<T>,
    u: RadialFunction<T>,
    s: T,
    opts: &SolveOptions<T>,
) -> SolveResult<T> {
    let problem = ctx.problem(u.grid().clone(), s);
    measure(&problem, u, ctx.branch(), 0, opts)
}

/// Parameters, potential, thresholds of the selected regime and the unit-ball eigenfunction v₁.
#[derive(Clone, Debug)]
pub struct Context<T> {
    pub params: ValidatedParams<T>,
    pub potential: RadialPotential<T>,
    pub inputs: ThresholdInputs<T>,
    pub regime: Regime,
    pub thresholds: ThresholdReport<T>,
    eigen: RadialFunction<T>,
}

impl<T: Real> Context<T> {
    pub fn new(
        params: ValidatedParams<T>,
        potential: RadialPotential<T>,
        table: &ConstantsTable<T>,
        regime: Regime,
    ) -> Result<Self, SolverError> {
        let norms = potential_norms_default(&potential, params.n())?;
        let inputs = ThresholdInputs::new(params, norms, table)?;
        let thresholds = threshold_report(&inputs, regime)?;
        let grid = Arc::new(RadialGrid::new(T::one(), EIGEN_CELLS, params.n())?);
        let (_, eigen) = discrete_principal_pair(grid)?;
        Ok(Self { params, potential, inputs, regime, thresholds, eigen })
    }

    /// Same potential and constants at another mass.
    pub fn with_alpha(&self, alpha: T) -> Result<Self, SolverError> {
        let params = self.params.with_alpha(alpha)?;
        let inputs = self.inputs.with_params(params);
        let thresholds = threshold_report(&inputs, self.regime)?;
        Ok(Self { params, inputs, thresholds, ..self.clone() })
    }

    /// v₁ on the unit ball, ‖v₁‖₂ = 1.
    pub fn eigenfunction(&self) -> &RadialFunction<T> {
        &self.eigen
    }

    pub fn branch(&self) -> Branch {
        match self.regime {
            Regime::BetaPositiveLocalMin => Branch::LocalMin,
            _ => Branch::MountainPass,
        }
    }

    /// E_r for the local minimum; E_{r,s} (q-term weighted) for β ≤ 0; 𝓔_{r,s} (both weighted) for β > 0.
    pub fn functional(&self, s: T) -> Functional<T> {
        match self.regime {
            Regime::BetaPositiveLocalMin if s == T::one() => Functional::Er,
            Regime::BetaPositiveLocalMin | Regime::BetaNonpositiveMP => Functional::Ers(s),
            Regime::BetaPositiveMP => Functional::CalErs(s),
        }
    }

    pub fn grid(&self, r: T, cells: usize) -> Result<Arc<RadialGrid<T>>, SolverError> {
        Ok(Arc::new(RadialGrid::new(r, cells, self.params.n())?))
    }

    pub fn problem(&self, grid: Arc<RadialGrid<T>>, s: T) -> DiscreteProblem<T> {
        DiscreteProblem::new(grid, self.params, &self.potential, self.functional(s))
    }

    /// v_t(x) = t^{N/2} v₁(tx) sampled on `grid` and scaled to mass α there.
    pub fn dilated_eigenfunction(&self, grid: &Arc<RadialGrid<T>>, t: T) -> RadialFunction<T> {
        let v = RadialFunction::from_fn(grid.clone(), |s| self.eigen.eval(t * s));
        v.normalized(self.params.alpha())
    }

    pub(crate) fn require_r(&self, r: T) -> Result<(), SolverError> {
        if r > self.thresholds.r_alpha {
            Ok(())
        } else {
            Err(SolverError::InvalidInput(format!("r = {r} must exceed r_alpha = {}", self.thresholds.r_alpha)))
        }
    }
}

pub(crate) fn tol_res<T: Real>(u: &RadialFunction<T>, opts: &SolveOptions<T>) -> T {
    opts.tol_res_rel * (T::one() + u.kinetic())
}

/// Zeroes negative values and restores the mass.
pub(crate) fn clip_negative<T: Real>(u: &mut RadialFunction<T>, alpha: T) {
    for v in u.values_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    u.normalize(alpha);
}

/// ‖u‖_s^s ≤ C_{N,s}‖u‖₂^{(2s-N(s-2))/2}‖∇u‖₂^{N(s-2)/2} for s = p, q with the tabulated constants,
/// up to the O(h²) consistency error of the discrete quotient (near-optimizers sit just above C).
fn gn_holds<T: Real>(ctx: &Context<T>, u: &RadialFunction<T>) -> bool {
    let h = u.grid().h();
    let slack = T::one() + T::lit(1e-9) + h * h * u.kinetic() / u.mass();
    gn_quotient(u, ctx.params.p()) <= ctx.inputs.c_p * slack && gn_quotient(u, ctx.params.q()) <= ctx.inputs.c_q * slack
}

/// Evaluates every reported quantity at u.
pub(crate) fn assemble<T: Real>(
    ctx: &Context<T>,
    problem: &DiscreteProblem<T>,
    u: RadialFunction<T>,
    branch: Branch,
    iterations: usize,
    opts: &SolveOptions<T>,
) -> SolveResult<T> {
    debug_assert!(gn_holds(ctx, &u), "Gagliardo-Nirenberg inequality fails on a solver iterate");
    measure(problem, u, branch, iterations, opts)
}

fn measure<T: Real>(
    problem: &DiscreteProblem<T>,
    u: RadialFunction<T>,
    branch: Branch,
    iterations: usize,
    opts: &SolveOptions<T>,
) -> SolveResult<T> {
    let (residual, lambda) = problem.residual_norm(u.values());
    let alpha = problem.alpha();
    let terms = problem.pohozaev(u.values(), lambda);
    let tol = tol_res(&u, opts);
    let mass_error = (u.mass() - alpha).abs() / alpha;
    let sup = u.sup();
    let diagnostics = Diagnostics {
        sup_u: sup,
        grad_norm_sq: u.kinetic(),
        tail: tail_decay_fit(&u, lambda).ok(),
        bumps: bump_tracker(&u, opts.bump_threshold * sup),
    };
    SolveResult {
        lambda,
        energy: problem.energy(&u),
        branch,
        s: problem.functional().s(),
        r: problem.grid().radius(),
        residual_norm: residual,
        tol_res: tol,
        pohozaev: terms.ball.abs(),
        pohozaev_terms: terms,
        mass_error,
        iterations,
        converged: residual <= tol && mass_error <= opts.tol_mass,
        diagnostics,
        u,
    }
}
