use serde::{Deserialize, Serialize};

use super::mountain::check_sandwich;
use super::{
    assemble, build_mp_endpoints_and_path, refine, solve_local_min, solve_mountain_pass, Branch, Context,
    SolveOptions, SolveResult, SolverError,
};
use crate::radial::{tail_decay_fit, TailFit};
use crate::real::Real;

/// Measured properties of an r-sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepChecks<T> {
    pub lambda_positive: bool,
    /// min λ over the last third of the sweep.
    pub lambda_tail_min: T,
    /// Local branch only: e_r nonincreasing in r within the slack.
    pub energy_nonincreasing: Option<bool>,
    /// sup u at the last radius over the median of all radii.
    pub sup_ratio: T,
    pub single_origin_bump: bool,
    /// ‖u_{k+1} - u_k‖_{H¹} with u_k zero-extended.
    pub h1_differences: Vec<T>,
    /// The last three differences decrease strictly or sit at the roundoff floor.
    pub h1_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T> {
    pub results: Vec<SolveResult<T>>,
    /// BranchLost when a radius failed; `results` then holds the radii before it.
    pub lost: Option<SolverError>,
    pub checks: Option<SweepChecks<T>>,
}

/// Solves along increasing radii with the first grid's spacing, warm-starting each radius from
/// the zero extension of the previous profile. Radii are rounded to whole cells.
pub fn continuation_in_r<T: Real>(
    ctx: &Context<T>,
    r_list: &[T],
    energy_slack: T,
    opts: &SolveOptions<T>,
) -> Result<Sweep<T>, SolverError> {
    if r_list.is_empty() || !r_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(SolverError::InvalidInput("r-list must be nonempty and increasing".into()));
    }
    let branch = ctx.branch();
    // later radii keep the first result's spacing
    let later = SolveOptions { refine_cells: None, ..*opts };
    let mut results: Vec<SolveResult<T>> = Vec::with_capacity(r_list.len());
    let mut lost = None;
    let mut h = None;
    for &r in r_list {
        let attempt = (|| -> Result<SolveResult<T>, SolverError> {
            match results.last() {
                None => {
                    let grid = ctx.grid(r, opts.cells)?;
                    let res = match branch {
                        Branch::LocalMin => solve_local_min(ctx, grid, opts, None)?,
                        Branch::MountainPass => {
                            let path = build_mp_endpoints_and_path(ctx, grid, T::one(), opts)?;
                            solve_mountain_pass(ctx, path, opts)?
                        }
                    };
                    Ok(res)
                }
                Some(prev) => {
                    let step: T = h.expect("spacing set by the first radius");
                    let cells = (r / step).round().to_usize().unwrap_or(0);
                    let grid = ctx.grid(step * T::of(cells), cells)?;
                    let warm = prev.u.zero_extended(grid.clone())?;
                    match branch {
                        Branch::LocalMin => solve_local_min(ctx, grid, &later, Some(warm)),
                        Branch::MountainPass => {
                            let problem = ctx.problem(grid, T::one());
                            let out = refine(&problem, &warm, &later)?;
                            let res = assemble(ctx, &problem, out.u, branch, out.iterations, &later);
                            check_sandwich(ctx, &res, &later)?;
                            Ok(res)
                        }
                    }
                }
            }
        })();
        match attempt {
            Ok(res) => {
                if h.is_none() {
                    h = Some(res.u.grid().h());
                }
                results.push(res);
            }
            Err(e) => {
                lost = Some(SolverError::BranchLost { r: r.as_f64(), source: Box::new(e) });
                break;
            }
        }
    }
    let checks = (!results.is_empty()).then(|| sweep_checks(&results, branch, energy_slack));
    Ok(Sweep { results, lost, checks })
}

fn sweep_checks<T: Real>(results: &[SolveResult<T>], branch: Branch, slack: T) -> SweepChecks<T> {
    let n = results.len();
    let third = n - n.div_ceil(3);
    let lambda_tail_min = results[third..].iter().map(|r| r.lambda).fold(T::infinity(), T::min);
    let energy_nonincreasing = (branch == Branch::LocalMin).then(|| {
        results.windows(2).all(|w| w[1].energy.total <= w[0].energy.total + slack * w[0].energy.total.abs())
    });
    let mut sups: Vec<T> = results.iter().map(|r| r.diagnostics.sup_u).collect();
    let last_sup = sups[n - 1];
    sups.sort_by(|a, b| a.partial_cmp(b).expect("finite sup"));
    let median = if n % 2 == 1 { sups[n / 2] } else { (sups[n / 2 - 1] + sups[n / 2]) / T::lit(2.0) };
    let single_origin_bump = results
        .iter()
        .all(|r| r.diagnostics.bumps.len() == 1 && r.diagnostics.bumps[0].location == T::zero());
    let h1_differences: Vec<T> = results
        .windows(2)
        .map(|w| {
            let ext = w[0].u.zero_extended(w[1].u.grid().clone()).expect("equal spacing along the sweep");
            w[1].u.sub(&ext).h1_norm_sq().sqrt()
        })
        .collect();
    let tail = &h1_differences[h1_differences.len().saturating_sub(3)..];
    // below this the profiles agree to roundoff and the differences are noise
    let floor = T::lit(64.0) * T::epsilon() * results[n - 1].u.h1_norm_sq().sqrt();
    SweepChecks {
        lambda_positive: results.iter().all(|r| r.lambda > T::zero()),
        lambda_tail_min,
        energy_nonincreasing,
        sup_ratio: last_sup / median,
        single_origin_bump,
        h1_decreasing: tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0] || w[1] <= floor),
        h1_differences,
    }
}

/// The last radius of a sweep read as an ℝ^N solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RnLimit<T> {
    pub result: SolveResult<T>,
    /// Pohozaev residual without the boundary term.
    pub whole_space_pohozaev: T,
    pub boundary_term: T,
    pub tail: TailFit<T>,
    /// u(0.9 r) / sup u.
    pub tail_level: T,
}

/// Accepts the result at r_max as the whole-space approximation once its tail is exponential and
/// u(0.9 r_max) is below `opts.tail_floor` relative to sup u.
pub fn rn_limit_solve<T: Real>(result: &SolveResult<T>, opts: &SolveOptions<T>) -> Result<RnLimit<T>, SolverError> {
    let u = &result.u;
    let sup = u.sup();
    let level = u.eval(T::lit(0.9) * u.grid().radius()).abs() / sup;
    let not_decayed = || SolverError::TailNotDecayed { value: level.as_f64(), floor: opts.tail_floor.as_f64() };
    let tail = tail_decay_fit(u, result.lambda).map_err(|e| SolverError::TailFitFailed(e.to_string()))?;
    if !(level <= opts.tail_floor) || !tail.exponential {
        return Err(not_decayed());
    }
    Ok(RnLimit {
        whole_space_pohozaev: result.pohozaev_terms.whole_space,
        boundary_term: result.pohozaev_terms.boundary,
        tail,
        tail_level: level,
        result: result.clone(),
    })
}
