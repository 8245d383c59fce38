#![allow(dead_code)]

pub mod oracle;

use std::sync::{Arc, OnceLock};

use nnls_core::constants::{ConstantsTable, Tolerances};
use nnls_core::model::{validate_params, PotentialNorms, ProblemParams, RadialPotential, ValidatedParams};
use nnls_core::radial::{RadialFunction, RadialGrid};
use nnls_core::solvers::Context;
use nnls_core::thresholds::{Regime, ThresholdInputs};
use rand::Rng;

/// N = 3 table with C_{3,3}, C_{3,5}, computed once per test binary.
pub fn table() -> &'static ConstantsTable<f64> {
    static TABLE: OnceLock<ConstantsTable<f64>> = OnceLock::new();
    TABLE.get_or_init(|| ConstantsTable::compute(3, &[3.0, 5.0], &Tolerances::default()).expect("constants"))
}

pub fn params(beta: f64, alpha: f64) -> ValidatedParams<f64> {
    validate_params(ProblemParams { n: 3, p: 3.0, q: 5.0, beta, alpha }).expect("admissible")
}

pub fn inputs(beta: f64, alpha: f64, norms: PotentialNorms<f64>) -> ThresholdInputs<f64> {
    ThresholdInputs::new(params(beta, alpha), norms, table()).expect("inputs")
}

pub fn context(beta: f64, alpha: f64, v: RadialPotential<f64>, regime: Regime) -> Context<f64> {
    Context::new(params(beta, alpha), v, table(), regime).expect("context")
}

/// β = 1, α = α_V/2, local-minimum regime.
pub fn standard_local(v: RadialPotential<f64>) -> Context<f64> {
    let probe = context(1.0, 1.0, v.clone(), Regime::BetaPositiveMP);
    let av = probe.thresholds.alpha_v.expect("alpha_V");
    context(1.0, 0.5 * av, v, Regime::BetaPositiveLocalMin)
}

/// β = 1, α = ã_V/2, mountain-pass regime.
pub fn standard_mp_pos() -> Context<f64> {
    let probe = context(1.0, 1.0, RadialPotential::Zero, Regime::BetaPositiveMP);
    let at = probe.thresholds.alpha_tilde_v.expect("alpha_tilde_V");
    context(1.0, 0.5 * at, RadialPotential::Zero, Regime::BetaPositiveMP)
}

/// β = -1, α = 1.
pub fn standard_mp_neg() -> Context<f64> {
    context(-1.0, 1.0, RadialPotential::Zero, Regime::BetaNonpositiveMP)
}

pub fn grid(r: f64, cells: usize, n: usize) -> Arc<RadialGrid<f64>> {
    Arc::new(RadialGrid::new(r, cells, n).expect("grid"))
}

/// Smooth positive radial profile vanishing at R: a random mix of Gaussians and a Lorentzian,
/// times (1 - (s/R)²).
pub fn random_profile<R: Rng>(rng: &mut R, g: Arc<RadialGrid<f64>>) -> RadialFunction<f64> {
    let big_r = g.radius();
    let k = rng.gen_range(1..=3);
    let terms: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0.0..0.4 * big_r), rng.gen_range(0.3..0.25 * big_r)))
        .collect();
    let lor = (rng.gen_range(0.0..0.5), rng.gen_range(0.5..3.0));
    RadialFunction::from_fn(g, move |s| {
        let mut v = lor.0 / (1.0 + (s / lor.1).powi(2));
        for (a, c, w) in &terms {
            v += a * (-((s - c) / w).powi(2)).exp();
        }
        v * (1.0 - (s / big_r).powi(2))
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Adaptive Simpson on [a, b].
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}
