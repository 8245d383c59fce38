use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::gauss_legendre;
use crate::real::{sphere_area, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid radius must be positive and finite")]
    InvalidRadius,
    #[error("grid needs at least 16 cells, got {0}")]
    TooFewNodes(usize),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("grids are incompatible: {0}")]
    Incompatible(String),
}

/// Uniform nodes s_i = i h, i = 0..=M, on [0, R] with N-dimensional radial quadrature.
///
/// Node weights are the exact measures σ∫ s^{N-1} ds of the dual cells
/// [0, h/2], [(i-½)h, (i+½)h], [R-h/2, R]; flux weights σ s_{i+½}^{N-1}/h define
/// the stiffness form K(u) = Σ w_i (u_{i+1} - u_i)².
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid<T> {
    radius: T,
    cells: usize,
    dim: usize,
    h: T,
    sigma: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    flux: Vec<T>,
}

/// Serializable grid metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GridMeta<T> {
    #[serde(rename = "R")]
    pub radius: T,
    #[serde(rename = "M")]
    pub cells: usize,
    #[serde(rename = "N")]
    pub dim: usize,
}

fn power_difference<T: Real>(a: T, b: T, n: usize) -> T {
    // a^n - b^n = (a - b) Σ a^k b^{n-1-k}, free of cancellation for nearby a, b
    let mut s = T::zero();
    for k in 0..n {
        s = s + a.powi(k as i32) * b.powi((n - 1 - k) as i32);
    }
    (a - b) * s
}

impl<T: Real> RadialGrid<T> {
    pub fn new(radius: T, cells: usize, dim: usize) -> Result<Self, GridError> {
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(GridError::InvalidRadius);
        }
        if cells < 16 {
            return Err(GridError::TooFewNodes(cells));
        }
        if dim < 2 {
            return Err(GridError::InvalidDimension(dim));
        }
        let h = radius / T::of(cells);
        let sigma: T = sphere_area(dim);
        let nn = T::of(dim);
        let half = T::lit(0.5);
        let nodes: Vec<T> = (0..=cells).map(|i| T::of(i) * h).collect();
        let edge = |i: usize| -> T {
            if i == 0 {
                T::zero()
            } else if i > cells {
                radius
            } else {
                (T::of(i) - half) * h
            }
        };
        let weights = (0..=cells)
            .map(|i| sigma / nn * power_difference(edge(i + 1), edge(i), dim))
            .collect();
        let flux = (0..cells)
            .map(|i| sigma * ((T::of(i) + half) * h).powi(dim as i32 - 1) / h)
            .collect();
        Ok(Self { radius, cells, dim, h, sigma, nodes, weights, flux })
    }

    pub fn from_meta(meta: GridMeta<T>) -> Result<Self, GridError> {
        Self::new(meta.radius, meta.cells, meta.dim)
    }

    pub fn meta(&self) -> GridMeta<T> {
        GridMeta { radius: self.radius, cells: self.cells, dim: self.dim }
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    /// Number of cells M; there are M+1 nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Area of the unit sphere S^{N-1}.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn flux(&self) -> &[T] {
        &self.flux
    }

    /// |B_R| in closed form.
    pub fn volume(&self) -> T {
        self.sigma / T::of(self.dim) * self.radius.powi(self.dim as i32)
    }

    /// Σ m_i f_i.
    pub fn integrate_nodes(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.weights.len());
        self.weights.iter().zip(f).fold(T::zero(), |acc, (w, x)| acc + *w * *x)
    }

    /// σ∫₀^R f(s) s^{N-1} ds by the given Gauss–Legendre rule on every cell.
    pub fn integrate_fn<F: Fn(T) -> T>(&self, f: F, rule: &(Vec<T>, Vec<T>)) -> T {
        let half = self.h / T::lit(2.0);
        let mut total = T::zero();
        for i in 0..self.cells {
            let mid = self.nodes[i] + half;
            let mut s = T::zero();
            for (x, w) in rule.0.iter().zip(&rule.1) {
                let r = mid + half * *x;
                s = s + *w * f(r) * r.powi(self.dim as i32 - 1);
            }
            total = total + s * half;
        }
        total * self.sigma
    }

    /// Same radius with the given number of cells.
    pub fn with_cells(&self, cells: usize) -> Result<Self, GridError> {
        Self::new(self.radius, cells, self.dim)
    }

    /// Same spacing, radius extended to the nearest multiple of h at or above `radius`.
    pub fn extended_to(&self, radius: T) -> Result<Self, GridError> {
        let cells = (radius / self.h - T::lit(1e-9)).ceil().to_usize().ok_or(GridError::InvalidRadius)?;
        if cells < self.cells {
            return Err(GridError::Incompatible("extension radius below current radius".into()));
        }
        Self::new(T::of(cells) * self.h, cells, self.dim)
    }

    /// Same cell count on B_{R/t}: the grid on which v_t(x) = t^{N/2} v(tx) has the nodal values of v.
    pub fn dilated(&self, t: T) -> Result<Self, GridError> {
        Self::new(self.radius / t, self.cells, self.dim)
    }

    /// Composite rule check helper: default 5-point Gauss–Legendre.
    pub fn default_rule() -> (Vec<T>, Vec<T>) {
        gauss_legendre(5)
    }
}
