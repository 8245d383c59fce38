//! Radial discretization of H¹₀(B_R).

mod energy;
mod function;
mod grid;
pub mod io;
mod verify;

pub use energy::{DiscreteProblem, EnergyBreakdown, Functional, PohozaevTerms, SampledPotential};
pub use function::{Profile, RadialFunction};
pub use grid::{GridError, GridMeta, RadialGrid};
pub use verify::{
    bump_tracker, energy_balance_residual, gn_quotient, linear_fit, tail_decay_fit, Bump, TailFit, VerifyError,
};
