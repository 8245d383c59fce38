use std::sync::Arc;

use super::{assemble, clip_negative, refine, Branch, Context, SolveOptions, SolveResult, SolverError};
use crate::radial::{DiscreteProblem, RadialFunction, RadialGrid};
use crate::real::Real;
use crate::thresholds::Regime;

/// Discretized path on the mass sphere; the first and last points stay fixed.
#[derive(Clone, Debug)]
pub struct PathState<T> {
    pub points: Vec<RadialFunction<T>>,
    pub energies: Vec<T>,
    /// Dilation parameter of each initial point.
    pub dilations: Vec<T>,
    pub s: T,
}

impl<T: Real> PathState<T> {
    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        self.points[0].grid()
    }

    pub fn argmax(&self) -> usize {
        let mut k = 0;
        for (i, e) in self.energies.iter().enumerate() {
            if *e > self.energies[k] {
                k = i;
            }
        }
        k
    }
}

fn separation_level<T: Real>(ctx: &Context<T>) -> Result<T, SolverError> {
    let p = &ctx.thresholds.points;
    let level = match ctx.regime {
        Regime::BetaNonpositiveMP => p.t_tilde,
        Regime::BetaPositiveMP => p.t_g,
        Regime::BetaPositiveLocalMin => None,
    };
    level.ok_or_else(|| SolverError::InvalidInput("mountain-pass path needs a mountain-pass regime".into()))
}

/// Endpoints u⁰ = v_{1/r_start}, u¹ = v_{t₀} and the dilation path t ↦ v_t between them, sampled at
/// `opts.path_points` equally spaced t.
pub fn build_mp_endpoints_and_path<T: Real>(
    ctx: &Context<T>,
    grid: Arc<RadialGrid<T>>,
    s: T,
    opts: &SolveOptions<T>,
) -> Result<PathState<T>, SolverError> {
    let level = separation_level(ctx)?;
    ctx.require_r(grid.radius())?;
    let missing = |w: &str| SolverError::InvalidInput(format!("threshold report lacks {w}"));
    let r_start = ctx.thresholds.r_start.ok_or_else(|| missing("r_start"))?;
    let t0 = ctx.thresholds.points.t0.ok_or_else(|| missing("t0"))?;
    let n = opts.path_points.max(3);
    let a = T::one() / r_start;
    let dilations: Vec<T> = (0..n).map(|i| a + (t0 - a) * T::of(i) / T::of(n - 1)).collect();
    let points: Vec<RadialFunction<T>> = dilations.iter().map(|t| ctx.dilated_eigenfunction(&grid, *t)).collect();
    let (k0, k1) = (points[0].kinetic(), points[n - 1].kinetic());
    if !(k0 < level && level < k1) {
        return Err(SolverError::EndpointsNotSeparated { start: k0.as_f64(), level: level.as_f64(), end: k1.as_f64() });
    }
    let problem = ctx.problem(grid, s);
    let energies: Vec<T> = points.iter().map(|u| problem.energy(u).total).collect();
    if energies[n - 1] > T::zero() {
        return Err(SolverError::EndpointEnergyPositive(energies[n - 1].as_f64()));
    }
    Ok(PathState { points, energies, dilations, s })
}

fn h1<T: Real>(u: &RadialFunction<T>) -> T {
    u.h1_norm_sq().sqrt()
}

fn lerp<T: Real>(a: &RadialFunction<T>, b: &RadialFunction<T>, w: T) -> RadialFunction<T> {
    let vals = a.values().iter().zip(b.values()).map(|(x, y)| (T::one() - w) * *x + w * *y).collect();
    RadialFunction::new(a.grid().clone(), vals)
}

/// Preconditioned mass-projected descent of one interior point.
fn evolve<T: Real>(problem: &DiscreteProblem<T>, u: &RadialFunction<T>, clip: bool) -> Option<RadialFunction<T>> {
    let alpha = problem.alpha();
    let (r, lambda) = problem.residual(u.values());
    let c = lambda.max(T::zero()) + T::one();
    let d = RadialFunction::new(u.grid().clone(), problem.precondition(c, &r)?);
    let hd = h1(&d);
    let step = if hd > T::zero() { T::lit(0.5).min(T::lit(0.05) * h1(u) / hd) } else { T::zero() };
    let vals = u.values().iter().zip(d.values()).map(|(x, y)| *x - step * *y).collect();
    let mut out = RadialFunction::new(u.grid().clone(), vals);
    if clip {
        clip_negative(&mut out, alpha);
    } else {
        out.normalize(alpha);
    }
    out.values().iter().all(|x| x.is_finite()).then_some(out)
}

/// Redistributes interior points by arclength weighted toward the high-energy part of the path.
fn reparametrize<T: Real>(path: &mut PathState<T>, problem: &DiscreteProblem<T>) {
    let n = path.points.len();
    let alpha = problem.alpha();
    let (lo, hi) = path.energies.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), e| (a.min(*e), b.max(*e)));
    let span = hi - lo;
    let mut cum = vec![T::zero(); n];
    for i in 0..n - 1 {
        let d = h1(&path.points[i + 1].sub(&path.points[i]));
        let top = path.energies[i].max(path.energies[i + 1]);
        let rel = if span > T::zero() { (top - lo) / span } else { T::zero() };
        cum[i + 1] = cum[i] + d * (T::lit(0.05) + rel * rel);
    }
    let total = cum[n - 1];
    if !(total > T::zero()) {
        return;
    }
    let mut fresh = path.points.clone();
    let mut j = 0;
    for (k, slot) in fresh.iter_mut().enumerate().take(n - 1).skip(1) {
        let target = total * T::of(k) / T::of(n - 1);
        while j < n - 2 && cum[j + 1] < target {
            j += 1;
        }
        let w = (target - cum[j]) / (cum[j + 1] - cum[j]);
        *slot = lerp(&path.points[j], &path.points[j + 1], w).normalized(alpha);
    }
    path.points = fresh;
    path.energies = path.points.iter().map(|u| problem.energy(u).total).collect();
}

/// String-method minimax from the dilation path, then bordered Newton from the highest point
/// (and again on `opts.refine_cells` when set). The result is checked against the regime's
/// energy bounds.
pub fn solve_mountain_pass<T: Real>(
    ctx: &Context<T>,
    mut path: PathState<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveResult<T>, SolverError> {
    let grid = path.grid().clone();
    let problem = ctx.problem(grid, path.s);
    let n = path.points.len();
    let e_start = path.energies[0];
    let mut last: Option<T> = None;
    let mut iterations = 0;
    while iterations < opts.string_max_iter {
        let kmax = path.argmax();
        let top = path.energies[kmax];
        if let Some(prev) = last {
            if (top - prev).abs() <= opts.string_tol * prev.abs() {
                break;
            }
        }
        last = Some(top);
        let clip = opts.clip_every > 0 && (iterations + 1) % opts.clip_every == 0;
        for i in 1..n - 1 {
            if i > kmax && path.energies[i] < e_start {
                continue;
            }
            if let Some(next) = evolve(&problem, &path.points[i], clip) {
                path.points[i] = next;
            }
        }
        path.energies = path.points.iter().map(|u| problem.energy(u).total).collect();
        reparametrize(&mut path, &problem);
        iterations += 1;
    }
    let kmax = path.argmax();
    if kmax == 0 || kmax == n - 1 {
        return Err(SolverError::PathCollapsed { index: kmax });
    }
    let out = refine(&problem, &path.points[kmax], opts)?;
    let mut result = assemble(ctx, &problem, out.u, Branch::MountainPass, iterations + out.iterations, opts);
    if let Some(cells) = opts.refine_cells {
        result = result.refined(ctx, cells, opts)?;
    }
    check_sandwich(ctx, &result, opts)?;
    Ok(result)
}

pub(crate) fn check_sandwich<T: Real>(ctx: &Context<T>, res: &SolveResult<T>, opts: &SolveOptions<T>) -> Result<(), SolverError> {
    let (Some(lower), Some(upper)) = (ctx.thresholds.mp_lower, ctx.thresholds.mp_upper) else {
        return Err(SolverError::InvalidInput("no mountain-pass bounds for this regime".into()));
    };
    let e = res.energy.total;
    let ok = e > T::zero()
        && e >= lower * (T::one() - opts.sandwich_slack)
        && e <= upper * (T::one() + opts.sandwich_slack);
    if ok {
        Ok(())
    } else {
        Err(SolverError::SandwichViolated { energy: e.as_f64(), lower: lower.as_f64(), upper: upper.as_f64() })
    }
}
