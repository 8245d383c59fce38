use std::sync::Arc;

use super::mountain::check_sandwich;
use super::{
    assemble, build_mp_endpoints_and_path, refine, solve_mountain_pass, Branch, Context, SolveOptions, SolveResult,
    SolverError,
};
use crate::radial::RadialGrid;
use crate::real::Real;

fn at_s<T: Real>(s: T) -> impl Fn(SolverError) -> SolverError {
    move |e| SolverError::AtS { s: s.as_f64(), source: Box::new(e) }
}

/// Mountain-pass solutions along an increasing s-grid ending at 1: a full string solve at the
/// first s, then Newton warm-started from the previous level. Fails if a level rises by more than
/// `slack` (relative) from one s to the next.
pub fn s_homotopy<T: Real>(
    ctx: &Context<T>,
    grid: Arc<RadialGrid<T>>,
    s_grid: &[T],
    slack: T,
    opts: &SolveOptions<T>,
) -> Result<Vec<SolveResult<T>>, SolverError> {
    let ok_grid = !s_grid.is_empty()
        && s_grid.windows(2).all(|w| w[0] < w[1])
        && s_grid[0] >= T::lit(0.5)
        && s_grid[s_grid.len() - 1] == T::one();
    if !ok_grid {
        return Err(SolverError::InvalidInput("s-grid must increase within [1/2, 1] and end at 1".into()));
    }
    let mut chain: Vec<SolveResult<T>> = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let res = match chain.last() {
            None => {
                let path = build_mp_endpoints_and_path(ctx, grid.clone(), s, opts).map_err(at_s(s))?;
                solve_mountain_pass(ctx, path, opts).map_err(at_s(s))?
            }
            Some(prev) => {
                let problem = ctx.problem(prev.u.grid().clone(), s);
                let out = refine(&problem, &prev.u, opts).map_err(at_s(s))?;
                let res = assemble(ctx, &problem, out.u, Branch::MountainPass, out.iterations, opts);
                check_sandwich(ctx, &res, opts).map_err(at_s(s))?;
                let (e0, e1) = (prev.energy.total, res.energy.total);
                if e1 > e0 + slack * e0.abs() {
                    return Err(SolverError::NotMonotone { s: s.as_f64(), previous: e0.as_f64(), current: e1.as_f64() });
                }
                res
            }
        };
        chain.push(res);
    }
    Ok(chain)
}
