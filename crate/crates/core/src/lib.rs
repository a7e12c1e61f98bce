//! Klein–Gordon field in three dimensions coupled to a nonlinear point
//! interaction at the origin.
//!
//! The field splits into a free part `ψ_f` and a retarded part generated by the
//! point amplitude `ζ(t)`. Everything is driven by the scalar integro-differential
//! equation for `ζ` ([`volterra::solve_reduced`]); the field is reconstructed
//! afterwards ([`field::snapshot`]) and compared with the solitary waves
//! ([`solitary::manifold_distance`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod freefield;
pub mod nonlinearity;
pub mod poly;
pub mod profile;
pub mod quad;
pub mod solitary;
pub mod specfun;
pub mod volterra;

pub use error::{Error, Result};
pub use nonlinearity::PolynomialPotential;
pub use specfun::Mass;
