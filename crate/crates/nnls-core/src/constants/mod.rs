//! Aubin–Talenti constant S, best Gagliardo–Nirenberg constants C_{N,s}, and the unit-ball
//! principal Dirichlet eigenvalue θ₁.

mod cache;
mod eigen;
mod gn;
mod sobolev;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

pub use cache::{cache_dir, cached_table, CACHE_ENV, CACHE_FILE};
pub use eigen::{ball_principal_eigenvalue, discrete_principal_pair, EigenPair};
pub use gn::{gn_best_constant, ground_state, GroundState};
pub use sobolev::{aubin_talenti, bubble_quotient};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("quadrature did not converge: last two refinements differ by {0:e} (relative)")]
    QuadratureNotConverged(f64),
    #[error("shooting bracket lost: {0}")]
    ShootingBracketLost(String),
    #[error("ground state not decayed: Q(R)/Q(0) = {0:e}")]
    GroundStateNotDecayed(f64),
    #[error("inverse iteration stalled after {0} iterations")]
    EigenIterationStalled(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cache: {0}")]
    Cache(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tolerances<T> {
    /// Relative agreement of two successive quadrature refinements.
    pub quadrature: T,
    /// Relative width of the final Q(0) bracket.
    pub shooting: T,
    /// Relative change of the Rayleigh quotient that ends inverse iteration.
    pub eigen: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self { quadrature: T::lit(1e-9), shooting: T::lit(1e-10), eigen: T::lit(1e-10) }
    }
}

/// How a constant was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Provenance<T> {
    pub method: String,
    pub resolution: String,
    /// Change of the value under the last refinement.
    pub error_estimate: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Constant<T> {
    pub value: T,
    pub provenance: Provenance<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GnEntry<T> {
    pub s: T,
    pub value: T,
    pub provenance: Provenance<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConstantsTable<T> {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub sobolev: Constant<T>,
    #[serde(rename = "C")]
    pub gn: Vec<GnEntry<T>>,
    pub theta1: Constant<T>,
    pub tolerances: Tolerances<T>,
}

impl<T: Real> ConstantsTable<T> {
    /// Computes S, θ₁ and C_{N,s} for each requested exponent.
    pub fn compute(n: usize, exponents: &[T], tol: &Tolerances<T>) -> Result<Self, ConstantsError> {
        let sobolev = aubin_talenti(n, tol)?;
        let eig = ball_principal_eigenvalue::<T>(n, tol)?;
        let mut gn = Vec::with_capacity(exponents.len());
        for &s in exponents {
            let c = gn_best_constant(n, s, tol)?;
            gn.push(GnEntry { s, value: c.value, provenance: c.provenance });
        }
        Ok(Self { n, sobolev, gn, theta1: eig.theta, tolerances: *tol })
    }

    pub fn s(&self) -> T {
        self.sobolev.value
    }

    pub fn theta1(&self) -> T {
        self.theta1.value
    }

    /// C_{N,s} for a tabulated exponent.
    pub fn gn(&self, s: T) -> Option<T> {
        let tol = T::lit(1e-12) * (T::one() + s.abs());
        self.gn.iter().find(|e| (e.s - s).abs() <= tol).map(|e| e.value)
    }
}
