//! Magnetic fractional Sobolev energies and their endpoint limits.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asym;
pub mod cli;
pub mod error;
pub mod gauss;
pub mod kernel;
pub mod model;
pub mod quad;
pub mod special;

pub use error::{FracError, Result};
pub use kernel::{complex_pnorm, complex_vec_pnorm, integrand, magnetic_difference, midpoint_phase, PairSample};
pub use model::{
    magnetic_gradient, Budget, EnergyEstimate, FieldKind, LimitFit, LimitModel, Method, NormFlavor, Params,
    PotentialKind, ScalarField, SetRegion, VectorPotential,
};
