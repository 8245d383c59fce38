use super::{tol_res, SolveOptions, SolverError};
use crate::radial::{DiscreteProblem, RadialFunction};
use crate::real::Real;

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Debug)]
pub struct NewtonOutcome<T> {
    pub u: RadialFunction<T>,
    pub lambda: T,
    pub residual: T,
    pub iterations: usize,
}

/// Bordered Newton on the mass sphere: solves J du + dλ u = -R with ∫u du = 0, then rescales to
/// mass α. Steps are halved until the residual norm decreases; iteration ends at the roundoff
/// floor (no decrease possible) or after `newton_max` steps. A first full step that stays within
/// tolerance is always taken, so a warm start already at the floor (a zero-extended profile) still
/// gets its tail from one solve. Fails if the final residual is above tolerance.
pub fn refine<T: Real>(
    problem: &DiscreteProblem<T>,
    start: &RadialFunction<T>,
    opts: &SolveOptions<T>,
) -> Result<NewtonOutcome<T>, SolverError> {
    let grid = problem.grid().clone();
    let alpha = problem.alpha();
    let m = grid.cells();
    let mw = &grid.weights()[..m];
    let mut u = if start.grid().meta() == grid.meta() { start.clone() } else { start.resampled(grid.clone()) };
    u.normalize(alpha);
    let (mut r, mut lambda) = problem.residual(u.values());
    let mut rn = problem.field_norm(&r);
    let mut iterations = 0;
    let half = T::lit(0.5);
    while iterations < opts.newton_max {
        let j = problem.jacobian(u.values(), lambda);
        let diverged = |what: &str| SolverError::SaddleRefinementDiverged(format!("singular Jacobian ({what})"));
        let y = j.solve(&r[..m]).ok_or_else(|| diverged("residual"))?;
        let z = j.solve(&u.values()[..m]).ok_or_else(|| diverged("mass direction"))?;
        let uv = u.values();
        let num = (0..m).fold(T::zero(), |a, i| a + mw[i] * uv[i] * y[i]);
        let den = (0..m).fold(T::zero(), |a, i| a + mw[i] * uv[i] * z[i]);
        let dl = -num / den;
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut vals: Vec<T> = uv.to_vec();
            for i in 0..m {
                vals[i] = vals[i] - step * (y[i] + dl * z[i]);
            }
            let mut cand = RadialFunction::new(grid.clone(), vals);
            cand.normalize(alpha);
            if !cand.values().iter().all(|v| v.is_finite()) {
                step = step * half;
                continue;
            }
            let (rc, lc) = problem.residual(cand.values());
            let nc = problem.field_norm(&rc);
            let first = iterations == 0 && step == T::one() && nc <= tol_res(&cand, opts);
            if nc < rn || first {
                accepted = Some((cand, rc, lc, nc));
                break;
            }
            step = step * half;
        }
        let Some((cand, rc, lc, nc)) = accepted else { break };
        iterations += 1;
        let slow = nc > half * rn;
        u = cand;
        r = rc;
        lambda = lc;
        rn = nc;
        if slow && rn <= tol_res(&u, opts) {
            break;
        }
    }
    if !(rn <= tol_res(&u, opts)) {
        return Err(SolverError::SaddleRefinementDiverged(format!(
            "residual {} above tolerance {} after {iterations} Newton steps",
            rn,
            tol_res(&u, opts)
        )));
    }
    Ok(NewtonOutcome { u, lambda, residual: rn, iterations })
}
