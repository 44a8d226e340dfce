//! Rigid-motion-invariant distance between parametrized curves in R^n.
//!
//! The distance between two curves is the infimum of a registration energy
//! over paths of rotations: the potential term measures how well the
//! rotated jet field of the source curve matches the jet field of the
//! target, the kinetic term penalizes variation of the rotation path.
//! The crate provides the Lie-group numerics, jet fields, the discrete
//! energy and its gradient, a shooting solver for the stationarity
//! equations, a direct Riemannian descent minimizer, and curve generators
//! with file I/O.

pub mod bvp;
pub mod curves;
pub mod distance;
pub mod energy;
pub mod error;
pub mod jets;
pub mod liegroup;
pub mod momentum;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use liegroup::{AlgebraElement, Component, Rotation};
