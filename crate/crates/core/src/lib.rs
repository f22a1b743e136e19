//! Isotropic random walks and compound Cox scattering processes on S^{p-1}.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`. Fisher information estimation in
//! [`estimate`] is `f64` only.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod real;

pub mod estimate;
pub mod rng;
pub mod scatter;
pub mod specfun;
pub mod sphere;
pub mod vmf;
pub mod walk;

pub use error::{Error, Result};
pub use real::Real;

pub type UnitVector = sphere::UnitVector<f64>;
pub type VmfParams = vmf::VmfParams<f64>;
pub type ZonalCoefficients = walk::ZonalCoefficients<f64>;
pub type CountingModel = scatter::CountingModel<f64>;
pub type ScatteringModel = scatter::ScatteringModel<f64>;
pub type AsymptoticMixture = scatter::AsymptoticMixture<f64>;
