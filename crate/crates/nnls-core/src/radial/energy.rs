use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::function::{mass, neg_laplacian, pow_integral, stiffness, RadialFunction};
use super::grid::RadialGrid;
use crate::linalg::Tridiagonal;
use crate::model::{RadialPotential, ValidatedParams};
use crate::real::Real;

/// Which functional is active.
///
/// `Er` is the plain energy; `Ers(s)` weights only the q-term by s; `CalErs(s)` weights both
/// nonlinear terms by s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "s", rename_all = "snake_case", bound = "T: Real")]
pub enum Functional<T> {
    Er,
    Ers(T),
    CalErs(T),
}

impl<T: Real> Functional<T> {
    /// (weight of the q-term, weight of the p-term).
    pub fn weights(&self) -> (T, T) {
        match *self {
            Functional::Er => (T::one(), T::one()),
            Functional::Ers(s) => (s, T::one()),
            Functional::CalErs(s) => (s, s),
        }
    }

    pub fn s(&self) -> T {
        match *self {
            Functional::Er => T::one(),
            Functional::Ers(s) | Functional::CalErs(s) => s,
        }
    }

    /// Same family with a different s.
    pub fn with_s(&self, s: T) -> Self {
        match self {
            Functional::Er | Functional::Ers(_) => Functional::Ers(s),
            Functional::CalErs(_) => Functional::CalErs(s),
        }
    }
}

/// Parts of the active functional; `p_term` and `q_term` carry the functional's s-weights,
/// so `total = kinetic + potential - p_term - q_term`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EnergyBreakdown<T> {
    /// ½∫|∇u|²
    pub kinetic: T,
    /// ½∫Vu²
    pub potential: T,
    /// (w_p β/p)∫|u|^p
    pub p_term: T,
    /// (w_q/q)∫|u|^q
    pub q_term: T,
    pub total: T,
    pub s: T,
}

/// V and Ṽ at grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential<T> {
    pub v: Vec<T>,
    pub vtilde: Vec<T>,
    pub zero: bool,
}

impl<T: Real> SampledPotential<T> {
    pub fn new(grid: &RadialGrid<T>, pot: &RadialPotential<T>) -> Self {
        let v = grid.nodes().iter().map(|s| pot.value(*s)).collect();
        let vtilde = grid.nodes().iter().map(|s| pot.vtilde(*s)).collect();
        Self { v, vtilde, zero: pot.is_zero() }
    }
}

/// Terms of the ball Pohozaev identity at a candidate critical point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PohozaevTerms<T> {
    /// Signed residual including the boundary term.
    pub ball: T,
    /// Signed residual without the boundary term.
    pub whole_space: T,
    /// (1/(2N)) σ R^N u'(R)².
    pub boundary: T,
}

/// A discretized problem: grid, parameters, sampled potential and active functional.
#[derive(Clone, Debug)]
pub struct DiscreteProblem<T> {
    grid: Arc<RadialGrid<T>>,
    params: ValidatedParams<T>,
    potential: Arc<SampledPotential<T>>,
    functional: Functional<T>,
}

impl<T: Real> DiscreteProblem<T> {
    pub fn new(
        grid: Arc<RadialGrid<T>>,
        params: ValidatedParams<T>,
        pot: &RadialPotential<T>,
        functional: Functional<T>,
    ) -> Self {
        let potential = Arc::new(SampledPotential::new(&grid, pot));
        Self { grid, params, potential, functional }
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn params(&self) -> &ValidatedParams<T> {
        &self.params
    }

    pub fn functional(&self) -> Functional<T> {
        self.functional
    }

    pub fn potential(&self) -> &SampledPotential<T> {
        &self.potential
    }

    pub fn with_functional(&self, functional: Functional<T>) -> Self {
        Self { functional, ..self.clone() }
    }

    pub fn alpha(&self) -> T {
        self.params.alpha()
    }

    fn weights(&self) -> (T, T) {
        self.functional.weights()
    }

    /// ∫Vu².
    pub fn potential_integral(&self, u: &[T]) -> T {
        if self.potential.zero {
            return T::zero();
        }
        self.grid
            .weights()
            .iter()
            .zip(u)
            .zip(&self.potential.v)
            .fold(T::zero(), |a, ((w, x), v)| a + *w * *v * *x * *x)
    }

    fn vtilde_integral(&self, u: &[T]) -> T {
        if self.potential.zero {
            return T::zero();
        }
        self.grid
            .weights()
            .iter()
            .zip(u)
            .zip(&self.potential.vtilde)
            .fold(T::zero(), |a, ((w, x), v)| a + *w * *v * *x * *x)
    }

    pub fn energy(&self, u: &RadialFunction<T>) -> EnergyBreakdown<T> {
        self.energy_values(u.values())
    }

    pub fn energy_values(&self, u: &[T]) -> EnergyBreakdown<T> {
        let (wq, wp) = self.weights();
        let half = T::lit(0.5);
        let p = self.params.p();
        let q = self.params.q();
        let kinetic = half * stiffness(&self.grid, u);
        let potential = half * self.potential_integral(u);
        let p_term = wp * self.params.beta() / p * pow_integral(&self.grid, u, p);
        let q_term = wq / q * pow_integral(&self.grid, u, q);
        EnergyBreakdown {
            kinetic,
            potential,
            p_term,
            q_term,
            total: kinetic + potential - p_term - q_term,
            s: self.functional.s(),
        }
    }

    /// w_q|x|^{q-2}x + w_p β|x|^{p-2}x.
    pub fn nonlinearity(&self, x: T) -> T {
        let (wq, wp) = self.weights();
        let a = x.abs();
        let two = T::lit(2.0);
        wq * a.powf(self.params.q() - two) * x + wp * self.params.beta() * a.powf(self.params.p() - two) * x
    }

    pub fn nonlinearity_derivative(&self, x: T) -> T {
        let (wq, wp) = self.weights();
        let a = x.abs();
        let one = T::one();
        let two = T::lit(2.0);
        let (p, q) = (self.params.p(), self.params.q());
        wq * (q - one) * a.powf(q - two) + wp * self.params.beta() * (p - one) * a.powf(p - two)
    }

    /// λ = -(1/∫u²)(∫|∇u|² + ∫Vu² - w_p β∫|u|^p - w_q∫|u|^q).
    pub fn multiplier(&self, u: &[T]) -> T {
        let (wq, wp) = self.weights();
        let k = stiffness(&self.grid, u);
        let pot = self.potential_integral(u);
        let pp = pow_integral(&self.grid, u, self.params.p());
        let qq = pow_integral(&self.grid, u, self.params.q());
        -(k + pot - wp * self.params.beta() * pp - wq * qq) / mass(&self.grid, u)
    }

    /// Residual field -Δu + Vu + λu - f(u) at nodes 0..M-1 (zero at the boundary node), with λ from
    /// [`DiscreteProblem::multiplier`].
    pub fn residual(&self, u: &[T]) -> (Vec<T>, T) {
        let lambda = self.multiplier(u);
        (self.residual_with(u, lambda), lambda)
    }

    pub fn residual_with(&self, u: &[T], lambda: T) -> Vec<T> {
        let mut r = neg_laplacian(&self.grid, u);
        let m = self.grid.cells();
        for i in 0..m {
            r[i] = r[i] + (self.potential.v[i] + lambda) * u[i] - self.nonlinearity(u[i]);
        }
        r[m] = T::zero();
        r
    }

    /// Grid L² norm (Σ m_i r_i²)^{1/2}.
    pub fn field_norm(&self, r: &[T]) -> T {
        mass(&self.grid, r).sqrt()
    }

    pub fn residual_norm(&self, u: &[T]) -> (T, T) {
        let (r, lambda) = self.residual(u);
        (self.field_norm(&r), lambda)
    }

    /// Jacobian of the residual in u at fixed λ, rows/columns 0..M-1.
    pub fn jacobian(&self, u: &[T], lambda: T) -> Tridiagonal<T> {
        let m = self.grid.cells();
        let w = self.grid.flux();
        let mw = self.grid.weights();
        let mut diag = Vec::with_capacity(m);
        let mut lower = Vec::with_capacity(m - 1);
        let mut upper = Vec::with_capacity(m - 1);
        for i in 0..m {
            let left = if i > 0 { w[i - 1] } else { T::zero() };
            diag.push((left + w[i]) / mw[i] + self.potential.v[i] + lambda - self.nonlinearity_derivative(u[i]));
            if i + 1 < m {
                upper.push(-w[i] / mw[i]);
                lower.push(-w[i] / mw[i + 1]);
            }
        }
        Tridiagonal { lower, diag, upper }
    }

    /// Symmetric form M^{1/2} J M^{-1/2} of the Jacobian, for inertia counts.
    pub fn symmetric_jacobian(&self, u: &[T], lambda: T) -> Tridiagonal<T> {
        let m = self.grid.cells();
        let w = self.grid.flux();
        let mw = self.grid.weights();
        let j = self.jacobian(u, lambda);
        let off: Vec<T> = (0..m - 1).map(|i| -w[i] / (mw[i] * mw[i + 1]).sqrt()).collect();
        Tridiagonal { lower: off.clone(), diag: j.diag, upper: off }
    }

    /// (A + c M) on nodes 0..M-1: the preconditioner -Δ + c in weak form.
    pub fn shifted_stiffness(&self, c: T) -> Tridiagonal<T> {
        let m = self.grid.cells();
        let w = self.grid.flux();
        let mw = self.grid.weights();
        let diag = (0..m)
            .map(|i| {
                let left = if i > 0 { w[i - 1] } else { T::zero() };
                left + w[i] + c * mw[i]
            })
            .collect();
        let off: Vec<T> = (0..m - 1).map(|i| -w[i]).collect();
        Tridiagonal { lower: off.clone(), diag, upper: off }
    }

    /// Solves (-Δ + c) d = r in weak form; returns d with d_M = 0.
    pub fn precondition(&self, c: T, r: &[T]) -> Option<Vec<T>> {
        let m = self.grid.cells();
        let rhs: Vec<T> = (0..m).map(|i| self.grid.weights()[i] * r[i]).collect();
        let mut d = self.shifted_stiffness(c).solve(&rhs)?;
        d.push(T::zero());
        Some(d)
    }

    /// Ball Pohozaev residual with λ given; u'(R) from the one-sided three-point formula.
    pub fn pohozaev(&self, u: &[T], lambda: T) -> PohozaevTerms<T> {
        let (wq, wp) = self.weights();
        let n = self.grid.dim();
        let nn = T::of(n);
        let two = T::lit(2.0);
        let h = self.grid.h();
        let m = self.grid.cells();
        let k = stiffness(&self.grid, u);
        let du = (T::lit(3.0) * u[m] - T::lit(4.0) * u[m - 1] + u[m - 2]) / (two * h);
        let boundary = self.grid.sigma() * self.grid.radius().powi(n as i32) * du * du / (two * nn);
        let p = self.params.p();
        let q = self.params.q();
        let interior = (nn - two) / (two * nn) * k
            + self.vtilde_integral(u) / (two * nn)
            + self.potential_integral(u) / two
            + lambda / two * mass(&self.grid, u)
            - wq / q * pow_integral(&self.grid, u, q)
            - wp * self.params.beta() / p * pow_integral(&self.grid, u, p);
        PohozaevTerms { ball: interior + boundary, whole_space: interior, boundary }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_params, ProblemParams};

    fn problem(f: Functional<f64>) -> (DiscreteProblem<f64>, RadialFunction<f64>) {
        let g = Arc::new(RadialGrid::<f64>::new(3.0, 256, 3).unwrap());
        let params = validate_params(ProblemParams { n: 3, p: 3.0, q: 5.0, beta: 0.7, alpha: 2.0 }).unwrap();
        let pot = RadialPotential::power_decay(0.2, 4.0).unwrap();
        let u = RadialFunction::from_fn(g.clone(), |s| (-(s * s)).exp() * (1.0 - s / 3.0));
        (DiscreteProblem::new(g, params, &pot, f), u)
    }

    #[test]
    fn total_is_signed_sum() {
        let (pb, u) = problem(Functional::CalErs(0.7));
        let e = pb.energy(&u);
        assert_eq!(e.total, e.kinetic + e.potential - e.p_term - e.q_term);
    }

    #[test]
    fn s_one_collapse() {
        let (pb, u) = problem(Functional::Er);
        let a = pb.energy(&u).total;
        let b = pb.with_functional(Functional::Ers(1.0)).energy(&u).total;
        let c = pb.with_functional(Functional::CalErs(1.0)).energy(&u).total;
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let (pb, u) = problem(Functional::Ers(0.8));
        let lambda = 0.37;
        let j = pb.jacobian(u.values(), lambda);
        let m = pb.grid().cells();
        let dir: Vec<f64> = (0..=m).map(|i| if i < m { ((i as f64) * 0.1).sin() } else { 0.0 }).collect();
        let eps = 1e-6;
        let plus: Vec<f64> = u.values().iter().zip(&dir).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = u.values().iter().zip(&dir).map(|(a, b)| a - eps * b).collect();
        let rp = pb.residual_with(&plus, lambda);
        let rm = pb.residual_with(&minus, lambda);
        let jd = j.apply(&dir[..m]);
        for i in 0..m {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            assert!((fd - jd[i]).abs() < 1e-5 * (1.0 + jd[i].abs()), "row {i}: {fd} vs {}", jd[i]);
        }
    }
}
