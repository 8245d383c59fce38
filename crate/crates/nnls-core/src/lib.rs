//! Normalized solutions of −Δu + V(x)u + λu = |u|^{q−2}u + β|u|^{p−2}u, ∫u² = α, on balls B_r
//! and in the large-r limit, for radial potentials.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the crate root re-exports `f64`
//! aliases for the common types.

// `!(x > y)` is used deliberately so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod radial;
pub mod real;
pub mod solvers;
pub mod thresholds;

pub use real::Real;

pub type Params = model::ProblemParams<f64>;
pub type Validated = model::ValidatedParams<f64>;
pub type Potential = model::RadialPotential<f64>;
pub type Grid = radial::RadialGrid<f64>;
pub type Function = radial::RadialFunction<f64>;
