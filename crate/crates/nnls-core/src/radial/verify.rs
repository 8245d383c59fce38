use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::energy::DiscreteProblem;
use super::function::RadialFunction;
use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("tail window degenerate: {0}")]
    WindowDegenerate(String),
}

/// Gagliardo–Nirenberg quotient ∫|u|^s / (‖u‖₂^{(2s-N(s-2))/2} ‖∇u‖₂^{N(s-2)/2}).
pub fn gn_quotient<T: Real>(u: &RadialFunction<T>, s: T) -> T {
    let nn = T::of(u.grid().dim());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mass_exp = (two * s - nn * (s - two)) / four;
    let grad_exp = nn * (s - two) / four;
    u.pow_integral(s) / (u.mass().powf(mass_exp) * u.kinetic().powf(grad_exp))
}

fn simpson_weights<T: Real>(cells: usize, h: T) -> Vec<T> {
    let mut w = vec![T::zero(); cells + 1];
    let third = h / T::lit(3.0);
    let simpson_end = if cells.is_multiple_of(2) { cells } else { cells - 3 };
    let mut i = 0;
    while i < simpson_end {
        w[i] = w[i] + third;
        w[i + 1] = w[i + 1] + T::lit(4.0) * third;
        w[i + 2] = w[i + 2] + third;
        i += 2;
    }
    if simpson_end < cells {
        let e = T::lit(3.0) * h / T::lit(8.0);
        let k = simpson_end;
        w[k] = w[k] + e;
        w[k + 1] = w[k + 1] + T::lit(3.0) * e;
        w[k + 2] = w[k + 2] + T::lit(3.0) * e;
        w[k + 3] = w[k + 3] + e;
    }
    w
}

/// Fourth-order nodal derivative with even reflection at the origin and one-sided stencils at R.
fn derivative4<T: Real>(u: &[T], h: T) -> Vec<T> {
    let m = u.len() - 1;
    let at = |k: isize| -> T { u[k.unsigned_abs()] };
    let twelve_h = T::lit(12.0) * h;
    let c = |x: f64| T::lit(x);
    (0..=m)
        .map(|i| {
            let k = i as isize;
            if i + 2 <= m {
                (at(k - 2) - c(8.0) * at(k - 1) + c(8.0) * at(k + 1) - at(k + 2)) / twelve_h
            } else if i + 1 == m {
                (c(3.0) * u[m] + c(10.0) * u[m - 1] - c(18.0) * u[m - 2] + c(6.0) * u[m - 3] - u[m - 4]) / twelve_h
            } else {
                (c(25.0) * u[m] - c(48.0) * u[m - 1] + c(36.0) * u[m - 2] - c(16.0) * u[m - 3] + c(3.0) * u[m - 4])
                    / twelve_h
            }
        })
        .collect()
}

/// Energy balance K + ∫Vu² + λ∫u² - w_p β∫|u|^p - w_q∫|u|^q evaluated with Simpson quadrature and
/// fourth-order derivatives on the nodal profile. At a discrete critical point the same combination
/// in the grid's own quadrature vanishes identically; this evaluation measures the discretization
/// error of the profile instead.
pub fn energy_balance_residual<T: Real>(problem: &DiscreteProblem<T>, u: &RadialFunction<T>, lambda: T) -> T {
    let g = problem.grid();
    let n = g.dim();
    let vals = u.values();
    let w = simpson_weights(g.cells(), g.h());
    let jac: Vec<T> = g
        .nodes()
        .iter()
        .zip(&w)
        .map(|(s, wi)| *wi * g.sigma() * s.powi(n as i32 - 1))
        .collect();
    let integrate = |f: &dyn Fn(usize) -> T| (0..vals.len()).fold(T::zero(), |a, i| a + jac[i] * f(i));
    let du = derivative4(vals, g.h());
    let params = problem.params();
    let (wq, wp) = problem.functional().weights();
    let v = &problem.potential().v;
    let k = integrate(&|i| du[i] * du[i]);
    let pot = integrate(&|i| v[i] * vals[i] * vals[i]);
    let mass = integrate(&|i| vals[i] * vals[i]);
    let pp = integrate(&|i| vals[i].abs().powf(params.p()));
    let qq = integrate(&|i| vals[i].abs().powf(params.q()));
    k + pot + lambda * mass - wp * params.beta() * pp - wq * qq
}

/// Least-squares fit of log u over the window [0.6R, 0.9R].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TailFit<T> {
    pub rate: T,
    /// Coefficient of determination of the linear fit.
    pub quality: T,
    /// rate < 0 and quality > 0.99.
    pub exponential: bool,
    /// -√λ, the far-field rate of u'' + (N-1)u'/s = λu, when λ > 0.
    pub reference_rate: Option<T>,
}

pub fn tail_decay_fit<T: Real>(u: &RadialFunction<T>, lambda: T) -> Result<TailFit<T>, VerifyError> {
    let g = u.grid();
    let r = g.radius();
    let (lo, hi) = (T::lit(0.6) * r, T::lit(0.9) * r);
    let floor = T::min_positive_value();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (s, v) in g.nodes().iter().zip(u.values()) {
        if *s >= lo && *s <= hi {
            if !(*v > floor) {
                return Err(VerifyError::WindowDegenerate(format!(
                    "u({}) = {} is not above the floating floor",
                    s.as_f64(),
                    v.as_f64()
                )));
            }
            xs.push(*s);
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(VerifyError::WindowDegenerate("fewer than three nodes in the window".into()));
    }
    let (slope, r2) = linear_fit(&xs, &ys);
    Ok(TailFit {
        rate: slope,
        quality: r2,
        exponential: slope < T::zero() && r2 > T::lit(0.99),
        reference_rate: (lambda > T::zero()).then(|| -lambda.sqrt()),
    })
}

/// Slope and R² of the least-squares line through (x, y).
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let n = T::of(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (a, b) in x.iter().zip(y) {
        let dx = *a - mx;
        let dy = *b - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let r2 = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    (slope, r2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Bump<T> {
    pub location: T,
    pub height: T,
    pub dist_to_boundary: T,
}

/// Local maxima above `threshold`; the origin counts when u₀ > u₁ (even symmetry).
pub fn bump_tracker<T: Real>(u: &RadialFunction<T>, threshold: T) -> Vec<Bump<T>> {
    let v = u.values();
    let g = u.grid();
    let m = v.len() - 1;
    let mut out = Vec::new();
    for i in 0..=m {
        let left = if i == 0 { v[1] } else { v[i - 1] };
        let right = if i < m { v[i + 1] } else { T::zero() };
        let is_max = v[i] >= left && v[i] > right && (i > 0 || v[0] > v[1]);
        if is_max && v[i] > threshold {
            let s = g.nodes()[i];
            out.push(Bump { location: s, height: v[i], dist_to_boundary: g.radius() - s });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::radial::RadialGrid;

    #[test]
    fn simpson_weights_integrate_cubics() {
        for cells in [16usize, 17] {
            let h = 2.0 / cells as f64;
            let w = simpson_weights(cells, h);
            let s: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64 * h).powi(3)).sum();
            assert!((s - 4.0).abs() < 1e-12, "cells={cells} got {s}");
        }
    }

    #[test]
    fn derivative4_is_fourth_order() {
        let err = |m: usize| {
            let h = 1.0 / m as f64;
            let u: Vec<f64> = (0..=m).map(|i| (i as f64 * h).cos()).collect();
            derivative4(&u, h)
                .iter()
                .enumerate()
                .map(|(i, d)| (d + (i as f64 * h).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn synthetic_exponential_tail() {
        let g = Arc::new(RadialGrid::<f64>::new(10.0, 400, 3).unwrap());
        let u = RadialFunction::from_fn(g, |s| (-2.0 * s).exp());
        let fit = tail_decay_fit(&u, 4.0).unwrap();
        assert!((fit.rate + 2.0).abs() < 1e-3);
        assert!(fit.exponential);
    }

    #[test]
    fn two_bumps() {
        let r = 20.0;
        let g = Arc::new(RadialGrid::<f64>::new(r, 2000, 3).unwrap());
        let u = RadialFunction::from_fn(g, |s| (-(s * s)).exp() + (-(s - r / 2.0).powi(2)).exp());
        let b = bump_tracker(&u, 1e-3);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].location, 0.0);
        assert!((b[1].location - 10.0).abs() < 0.02);
    }
}
