use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{GridError, GridMeta, RadialGrid};
use crate::real::Real;

/// Grid function with the Dirichlet condition u(R) = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Profile<T>", into = "Profile<T>", bound = "T: Real")]
pub struct RadialFunction<T> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<T>,
}

/// Serialized form: grid metadata and nodal values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Profile<T> {
    pub grid: GridMeta<T>,
    pub values: Vec<T>,
}

impl<T: Real> TryFrom<Profile<T>> for RadialFunction<T> {
    type Error = GridError;
    fn try_from(p: Profile<T>) -> Result<Self, GridError> {
        let grid = Arc::new(RadialGrid::from_meta(p.grid)?);
        if p.values.len() != grid.cells() + 1 {
            return Err(GridError::Incompatible(format!(
                "{} values for {} nodes",
                p.values.len(),
                grid.cells() + 1
            )));
        }
        Ok(Self::new(grid, p.values))
    }
}

impl<T: Real> From<RadialFunction<T>> for Profile<T> {
    fn from(u: RadialFunction<T>) -> Self {
        Profile { grid: u.grid.meta(), values: u.values }
    }
}

impl<T: Real> RadialFunction<T> {
    /// Wraps nodal values; the last value is forced to zero.
    pub fn new(grid: Arc<RadialGrid<T>>, mut values: Vec<T>) -> Self {
        assert_eq!(values.len(), grid.cells() + 1, "one value per node");
        *values.last_mut().expect("nonempty") = T::zero();
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(T) -> T>(grid: Arc<RadialGrid<T>>, f: F) -> Self {
        let values = grid.nodes().iter().map(|s| f(*s)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid<T>>) -> Self {
        let n = grid.cells() + 1;
        Self::new(grid, vec![T::zero(); n])
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Raw nodal values. Call [`RadialFunction::enforce_dirichlet`] after writing the last node.
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn enforce_dirichlet(&mut self) {
        *self.values.last_mut().expect("nonempty") = T::zero();
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// ∫u².
    pub fn mass(&self) -> T {
        mass(&self.grid, &self.values)
    }

    /// ∫|∇u|².
    pub fn kinetic(&self) -> T {
        stiffness(&self.grid, &self.values)
    }

    /// ∫|u|^s.
    pub fn pow_integral(&self, s: T) -> T {
        pow_integral(&self.grid, &self.values, s)
    }

    /// ‖u‖_s.
    pub fn lp_norm(&self, s: T) -> T {
        self.pow_integral(s).powf(T::one() / s)
    }

    pub fn sup(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Discrete -Δu = M^{-1} A u at nodes 0..M-1, zero at the boundary node.
    pub fn neg_laplacian(&self) -> Vec<T> {
        neg_laplacian(&self.grid, &self.values)
    }

    /// u scaled to mass α.
    pub fn normalized(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.normalize(alpha);
        out
    }

    pub fn normalize(&mut self, alpha: T) {
        let m = self.mass();
        let c = (alpha / m).sqrt();
        for v in &mut self.values {
            *v = *v * c;
        }
    }

    /// v_t(x) = t^{N/2} v(tx) realized by remapping the grid to B_{R/t}; nodal values scale by t^{N/2}.
    pub fn dilated(&self, t: T) -> Result<Self, GridError> {
        let grid = Arc::new(self.grid.dilated(t)?);
        let c = t.powf(T::of(self.grid.dim()) / T::lit(2.0));
        Ok(Self::new(grid, self.values.iter().map(|v| *v * c).collect()))
    }

    /// Zero extension onto a grid with the same spacing and a larger radius.
    pub fn zero_extended(&self, grid: Arc<RadialGrid<T>>) -> Result<Self, GridError> {
        let tol = T::lit(1e-12) * self.grid.h();
        if (grid.h() - self.grid.h()).abs() > tol || grid.cells() < self.grid.cells() || grid.dim() != self.grid.dim() {
            return Err(GridError::Incompatible("zero extension needs equal spacing and a larger radius".into()));
        }
        let mut values = self.values.clone();
        values.resize(grid.cells() + 1, T::zero());
        Ok(Self::new(grid, values))
    }

    /// Linear interpolation at radius s; zero outside [0, R].
    pub fn eval(&self, s: T) -> T {
        if s < T::zero() || s >= self.grid.radius() {
            return T::zero();
        }
        let x = s / self.grid.h();
        let i = x.floor().to_usize().unwrap_or(0).min(self.grid.cells() - 1);
        let w = x - T::of(i);
        self.values[i] * (T::one() - w) + self.values[i + 1] * w
    }

    /// Linear interpolation onto another grid of the same dimension.
    pub fn resampled(&self, grid: Arc<RadialGrid<T>>) -> Self {
        let values = grid.nodes().iter().map(|s| self.eval(*s)).collect();
        Self::new(grid, values)
    }

    /// Nodewise difference; grids must coincide.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid.meta(), other.grid.meta(), "same grid");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a - *b).collect();
        Self::new(self.grid.clone(), values)
    }

    /// ‖u‖²_{H¹} = ∫|∇u|² + ∫u².
    pub fn h1_norm_sq(&self) -> T {
        self.kinetic() + self.mass()
    }
}

pub(crate) fn mass<T: Real>(g: &RadialGrid<T>, u: &[T]) -> T {
    g.weights().iter().zip(u).fold(T::zero(), |a, (w, x)| a + *w * *x * *x)
}

pub(crate) fn stiffness<T: Real>(g: &RadialGrid<T>, u: &[T]) -> T {
    g.flux()
        .iter()
        .zip(u.windows(2))
        .fold(T::zero(), |a, (w, d)| {
            let e = d[1] - d[0];
            a + *w * e * e
        })
}

pub(crate) fn pow_integral<T: Real>(g: &RadialGrid<T>, u: &[T], s: T) -> T {
    g.weights().iter().zip(u).fold(T::zero(), |a, (w, x)| a + *w * x.abs().powf(s))
}

/// (A u)_i for i = 0..M-1.
pub(crate) fn stiffness_apply<T: Real>(g: &RadialGrid<T>, u: &[T]) -> Vec<T> {
    let m = g.cells();
    let w = g.flux();
    let mut out = vec![T::zero(); m + 1];
    for i in 0..m {
        let d = w[i] * (u[i] - u[i + 1]);
        out[i] = out[i] + d;
        out[i + 1] = out[i + 1] - d;
    }
    out[m] = T::zero();
    out
}

pub(crate) fn neg_laplacian<T: Real>(g: &RadialGrid<T>, u: &[T]) -> Vec<T> {
    let mut a = stiffness_apply(g, u);
    for (x, m) in a.iter_mut().zip(g.weights()) {
        *x = *x / *m;
    }
    *a.last_mut().expect("nonempty") = T::zero();
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_integration_by_parts() {
        let g = Arc::new(RadialGrid::<f64>::new(1.0, 200, 3).unwrap());
        let u = RadialFunction::from_fn(g.clone(), |s| (1.0 - s * s) * (1.0 + s));
        let v = RadialFunction::from_fn(g.clone(), |s| (1.0 - s).powi(2) * s.cos());
        let lap = u.neg_laplacian();
        let lhs = g.integrate_nodes(&lap.iter().zip(v.values()).map(|(a, b)| a * b).collect::<Vec<_>>());
        let rhs: f64 = g
            .flux()
            .iter()
            .zip(u.values().windows(2).zip(v.values().windows(2)))
            .map(|(w, (a, b))| w * (a[1] - a[0]) * (b[1] - b[0]))
            .sum();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn dilation_preserves_mass_and_scales_kinetic() {
        let g = Arc::new(RadialGrid::<f64>::new(1.0, 512, 3).unwrap());
        let u = RadialFunction::from_fn(g, |s| (1.0 - s * s).powi(2));
        let t = 2.5;
        let ut = u.dilated(t).unwrap();
        assert!((ut.mass() / u.mass() - 1.0).abs() < 1e-13);
        assert!((ut.kinetic() / (t * t * u.kinetic()) - 1.0).abs() < 1e-13);
    }
}
