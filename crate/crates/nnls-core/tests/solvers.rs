mod common;

use common::{context, rel, standard_local, standard_mp_neg, standard_mp_pos};
use nnls_core::model::RadialPotential;
use nnls_core::radial::RadialFunction;
use nnls_core::solvers::{
    build_mp_endpoints_and_path, continuation_in_r, initial_guess_local, rn_limit_solve, s_homotopy, solve_local_min,
    Branch, Context, SolveOptions, SolverError,
};
use nnls_core::thresholds::{Regime, ThresholdError};

const THETA1: f64 = std::f64::consts::PI * std::f64::consts::PI;

fn decaying() -> RadialPotential<f64> {
    RadialPotential::power_decay(0.1, 4.0).unwrap()
}

/// λ from a pointwise second-order stencil of u'' + (N-1)u'/s with trapezoid weights s² h,
/// fitted in least squares against the equation. Independent of the solver's flux form.
fn stencil_lambda(u: &RadialFunction<f64>, v: &RadialPotential<f64>, beta: f64) -> f64 {
    let x = u.values();
    let s = u.grid().nodes();
    let h = s[1] - s[0];
    let f = |y: f64| y.abs().powi(3) * y + beta * y.abs() * y;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() - 1 {
        let (lap, w) = if i == 0 {
            (6.0 * (x[1] - x[0]) / (h * h), h * h * h / 24.0)
        } else {
            let d2 = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (h * h);
            (d2 + (x[i + 1] - x[i - 1]) / (h * s[i]), s[i] * s[i] * h)
        };
        num += w * x[i] * (lap - v.value(s[i]) * x[i] + f(x[i]));
        den += w * x[i] * x[i];
    }
    num / den
}

#[test]
fn local_initial_guess() {
    let ctx = standard_local(RadialPotential::Zero);
    let alpha = ctx.params.alpha();
    let r = 2.0 * ctx.thresholds.r_alpha;
    let u = initial_guess_local(&ctx, ctx.grid(r, 2048).unwrap()).unwrap();
    assert!(rel(u.mass(), alpha) < 1e-12);
    assert!(rel(u.kinetic(), THETA1 * alpha / (r * r)) < 1e-6);
    assert!(ctx.problem(u.grid().clone(), 1.0).energy(&u).total < 0.0);
    assert!(u.min() >= 0.0);
}

#[test]
fn local_requires_radius_beyond_r_alpha() {
    let ctx = standard_local(RadialPotential::Zero);
    let g = ctx.grid(0.5 * ctx.thresholds.r_alpha, 256).unwrap();
    assert!(matches!(initial_guess_local(&ctx, g), Err(SolverError::InvalidInput(_))));
}

#[test]
fn local_branch_refused_for_negative_beta() {
    let err = Context::new(common::params(-1.0, 1.0), RadialPotential::Zero, common::table(), Regime::BetaPositiveLocalMin)
        .unwrap_err();
    assert!(matches!(err, SolverError::Threshold(ThresholdError::RegimeMismatch(_))), "{err}");
}

#[test]
fn local_branch_refused_above_alpha_v() {
    let probe = context(1.0, 1.0, RadialPotential::Zero, Regime::BetaPositiveMP);
    let av = probe.thresholds.alpha_v.unwrap();
    let err = Context::new(common::params(1.0, 1.01 * av), RadialPotential::Zero, common::table(), Regime::BetaPositiveLocalMin)
        .unwrap_err();
    assert!(matches!(err, SolverError::Threshold(ThresholdError::RegimeMismatch(_))), "{err}");
}

#[test]
fn local_minimizer_standard_configs() {
    let opts = SolveOptions::default();
    for v in [RadialPotential::Zero, decaying()] {
        let ctx = standard_local(v.clone());
        let alpha = ctx.params.alpha();
        let r = 2.0 * ctx.thresholds.r_alpha;
        let res = solve_local_min(&ctx, ctx.grid(r, 2048).unwrap(), &opts, None).unwrap();
        let cap = ctx.thresholds.points.t_alpha_radius.unwrap().powi(2);
        assert!(res.converged);
        assert_eq!(res.branch, Branch::LocalMin);
        assert!(res.energy.total < 0.0 && res.lambda > 0.0);
        assert!(res.diagnostics.grad_norm_sq < cap);
        assert!(res.lambda * alpha + 2.0 * res.energy.total > 0.0);
        assert!(res.mass_error <= 1e-10);
        assert!(res.residual_norm <= 1e-8 * (1.0 + res.diagnostics.grad_norm_sq));
        assert!(res.u.min() >= 0.0);
        assert_eq!(res.diagnostics.bumps.len(), 1);

        let coarse = rel(stencil_lambda(&res.u, &v, 1.0), res.lambda);
        assert!(coarse < 1e-4, "stencil lambda off by {coarse:e}");
        let fine = res.refined(&ctx, 4096, &opts).unwrap();
        let finer = rel(stencil_lambda(&fine.u, &v, 1.0), fine.lambda);
        assert!(finer < 0.5 * coarse, "{finer:e} vs {coarse:e}");

        // the far field decays like e^{-√λ s}/s; the plain exponential fit sees the 1/s factor too
        let tail = res.diagnostics.tail.as_ref().unwrap();
        assert!(tail.exponential);
        assert!(rel(-tail.rate, res.lambda.sqrt()) < 0.15);
    }
}

#[test]
fn warm_start_reproduces_solution() {
    let ctx = standard_local(RadialPotential::Zero);
    let opts = SolveOptions::default();
    let g = ctx.grid(2.0 * ctx.thresholds.r_alpha, 1024).unwrap();
    let a = solve_local_min(&ctx, g.clone(), &opts, None).unwrap();
    let b = solve_local_min(&ctx, g, &opts, Some(a.u.clone())).unwrap();
    assert!(rel(b.energy.total, a.energy.total) < 1e-10);
    assert!(rel(b.lambda, a.lambda) < 1e-7);
}

#[test]
fn short_radius_tail_is_rejected() {
    let ctx = standard_local(RadialPotential::Zero);
    let opts = SolveOptions::default();
    let res = solve_local_min(&ctx, ctx.grid(1.05 * ctx.thresholds.r_alpha, 512).unwrap(), &opts, None).unwrap();
    assert!(matches!(rn_limit_solve(&res, &opts), Err(SolverError::TailNotDecayed { .. })));
}

#[test]
fn mountain_pass_endpoints() {
    let opts = SolveOptions::default();
    for ctx in [standard_mp_pos(), standard_mp_neg()] {
        let alpha = ctx.params.alpha();
        let r = 2.0 * ctx.thresholds.r_alpha;
        let level = match ctx.regime {
            Regime::BetaPositiveMP => ctx.thresholds.points.t_g,
            _ => ctx.thresholds.points.t_tilde,
        }
        .unwrap();
        let path = build_mp_endpoints_and_path(&ctx, ctx.grid(r, 2048).unwrap(), 1.0, &opts).unwrap();
        let n = path.points.len();
        assert_eq!(n, opts.path_points);
        assert!(path.points[0].kinetic() < level && level < path.points[n - 1].kinetic());
        assert!(path.energies[n - 1] <= 0.0);
        for u in &path.points {
            assert!(rel(u.mass(), alpha) < 1e-10);
        }
        assert!(path.dilations.windows(2).all(|w| w[0] < w[1]));
        // the dilation path climbs over the separating sphere
        assert!(path.energies[path.argmax()] > path.energies[0].max(path.energies[n - 1]));
    }
}

#[test]
fn mountain_pass_needs_mp_regime() {
    let ctx = standard_local(RadialPotential::Zero);
    let g = ctx.grid(2.0 * ctx.thresholds.r_alpha, 256).unwrap();
    assert!(build_mp_endpoints_and_path(&ctx, g, 1.0, &SolveOptions::default()).is_err());
}

#[test]
fn homotopy_rejects_bad_s_grids() {
    let ctx = standard_mp_neg();
    let g = ctx.grid(2.0 * ctx.thresholds.r_alpha, 256).unwrap();
    let opts = SolveOptions::default();
    for s in [vec![0.4, 1.0], vec![0.5, 0.9], vec![0.7, 0.6, 1.0], vec![]] {
        assert!(matches!(s_homotopy(&ctx, g.clone(), &s, 1e-6, &opts), Err(SolverError::InvalidInput(_))));
    }
}

#[test]
fn continuation_rejects_unsorted_radii() {
    let ctx = standard_local(RadialPotential::Zero);
    let r = ctx.thresholds.r_alpha;
    let opts = SolveOptions::default();
    assert!(continuation_in_r(&ctx, &[4.0 * r, 2.0 * r], 1e-8, &opts).is_err());
    assert!(continuation_in_r(&ctx, &[], 1e-8, &opts).is_err());
}
