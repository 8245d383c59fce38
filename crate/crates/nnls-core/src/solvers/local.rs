use std::sync::Arc;

use super::{assemble, clip_negative, refine, tol_res, Branch, Context, SolveOptions, SolveResult, SolverError};
use crate::constants::discrete_principal_pair;
use crate::radial::{DiscreteProblem, RadialFunction, RadialGrid};
use crate::real::Real;
use crate::thresholds::Regime;

const MIN_DT: f64 = 1e-12;
const MAX_DT: f64 = 1e4;

fn trust_cap<T: Real>(ctx: &Context<T>) -> Result<T, SolverError> {
    let t = ctx.thresholds.points.t_alpha_radius.ok_or_else(|| {
        SolverError::InvalidInput("trust radius is defined only for the beta > 0 local-minimum regime".into())
    })?;
    Ok(t * t)
}

/// The ball's principal Dirichlet eigenfunction on the solve grid, i.e. v₁ dilated to B_r, at mass α.
pub fn initial_guess_local<T: Real>(ctx: &Context<T>, grid: Arc<RadialGrid<T>>) -> Result<RadialFunction<T>, SolverError> {
    if ctx.regime != Regime::BetaPositiveLocalMin {
        return Err(SolverError::InvalidInput("local initial guess needs the beta > 0 local-minimum regime".into()));
    }
    ctx.require_r(grid.radius())?;
    let (_, v) = discrete_principal_pair(grid)?;
    let u = v.normalized(ctx.params.alpha());
    let cap = trust_cap(ctx)?;
    let k = u.kinetic();
    if k >= cap {
        return Err(SolverError::OutsideTrustRegion { grad_norm_sq: k.as_f64(), cap: cap.as_f64() });
    }
    Ok(u)
}

/// One semi-implicit step (1 - dt Δ) u* = u + dt (f(u) - Vu), rescaled to mass α.
fn descent_step<T: Real>(problem: &DiscreteProblem<T>, u: &RadialFunction<T>, dt: T) -> Option<RadialFunction<T>> {
    let v = &problem.potential().v;
    let inv = T::one() / dt;
    let rhs: Vec<T> = u
        .values()
        .iter()
        .zip(v)
        .map(|(x, vi)| *x * inv + problem.nonlinearity(*x) - *vi * *x)
        .collect();
    let next = problem.precondition(inv, &rhs)?;
    let mut out = RadialFunction::new(problem.grid().clone(), next);
    out.normalize(problem.alpha());
    out.values().iter().all(|x| x.is_finite()).then_some(out)
}

/// Minimizes E_r on the mass sphere inside ∫|∇u|² ≤ T_α²: energy-monotone semi-implicit descent
/// with step control, then bordered Newton once the residual is small (and again on
/// `opts.refine_cells` when set). `warm` replaces the eigenfunction start.
pub fn solve_local_min<T: Real>(
    ctx: &Context<T>,
    grid: Arc<RadialGrid<T>>,
    opts: &SolveOptions<T>,
    warm: Option<RadialFunction<T>>,
) -> Result<SolveResult<T>, SolverError> {
    let res = descend(ctx, grid, opts, warm)?;
    match opts.refine_cells {
        Some(cells) => res.refined(ctx, cells, opts),
        None => Ok(res),
    }
}

fn descend<T: Real>(
    ctx: &Context<T>,
    grid: Arc<RadialGrid<T>>,
    opts: &SolveOptions<T>,
    warm: Option<RadialFunction<T>>,
) -> Result<SolveResult<T>, SolverError> {
    let cap = trust_cap(ctx)?;
    ctx.require_r(grid.radius())?;
    let alpha = ctx.params.alpha();
    let problem = ctx.problem(grid.clone(), T::one());
    let mut u = match warm {
        Some(w) => {
            let mut w = if w.grid().meta() == grid.meta() { w } else { w.resampled(grid.clone()) };
            w.normalize(alpha);
            w
        }
        None => initial_guess_local(ctx, grid.clone())?,
    };
    let limit = cap * (T::one() - opts.trust_margin);
    let mut energy = problem.energy(&u).total;
    let mut dt = opts.descent_dt;
    let mut iterations = 0;
    let mut capped = false;
    let mut switch = opts.newton_switch;
    while iterations < opts.max_descent {
        let (rn, _) = problem.residual_norm(u.values());
        if rn <= switch * (T::one() + u.kinetic()) {
            if let Ok(out) = refine(&problem, &u, opts) {
                let mut v = out.u;
                if v.min() < T::zero() {
                    clip_negative(&mut v, alpha);
                }
                let e = problem.energy(&v).total;
                // Newton may land a roundoff above the descent's last energy
                let noise = T::lit(1e-12) * (energy.abs() + v.kinetic());
                if v.kinetic() < limit && e <= energy + noise {
                    let res = assemble(ctx, &problem, v, Branch::LocalMin, iterations + out.iterations, opts);
                    if res.converged {
                        return Ok(res);
                    }
                }
            }
            if rn <= tol_res(&u, opts) {
                return Ok(assemble(ctx, &problem, u, Branch::LocalMin, iterations, opts));
            }
            switch = switch * T::lit(0.01);
        }
        let mut accepted = false;
        while dt >= T::lit(MIN_DT) {
            match descent_step(&problem, &u, dt) {
                Some(mut cand) => {
                    let mut e = problem.energy(&cand).total;
                    if opts.clip_every > 0 && (iterations + 1) % opts.clip_every == 0 && cand.min() < T::zero() {
                        let mut c = cand.clone();
                        clip_negative(&mut c, alpha);
                        let ec = problem.energy(&c).total;
                        if ec <= e {
                            cand = c;
                            e = ec;
                        }
                    }
                    let k = cand.kinetic();
                    capped = k >= limit;
                    if e <= energy && !capped {
                        u = cand;
                        energy = e;
                        accepted = true;
                        break;
                    }
                }
                None => capped = false,
            }
            dt = dt * T::lit(0.5);
        }
        iterations += 1;
        if !accepted {
            if capped {
                return Err(SolverError::HitTrustBoundary { grad_norm_sq: u.kinetic().as_f64(), cap: cap.as_f64() });
            }
            // no energy decrease left: the descent sits at its floor
            break;
        }
        dt = (dt * T::lit(1.5)).min(T::lit(MAX_DT));
    }
    let res = assemble(ctx, &problem, u.clone(), Branch::LocalMin, iterations, opts);
    if res.converged {
        return Ok(res);
    }
    match refine(&problem, &u, opts) {
        Ok(out) => Ok(assemble(ctx, &problem, out.u, Branch::LocalMin, iterations + out.iterations, opts)),
        Err(_) => Err(SolverError::MaxIterations { iterations, residual: res.residual_norm.as_f64() }),
    }
}
