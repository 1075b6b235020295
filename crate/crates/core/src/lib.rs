//! Block-matrix Sinkhorn scaling with capacity tracking, rank bounds for design matrices
//! with block entries, and the incidence-geometry constructions built on them.
//!
//! The numeric core ([`blockmat`], [`scaling`], [`design`]) is generic over the real scalar
//! type ([`Real`], implemented for `f32` and `f64`); the aliases below fix it to `f64`.

pub mod blockmat;
pub mod design;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod scaling;

pub use error::{Axis, Error, Result};
pub use scalar::Real;

pub type BlockMatrix = blockmat::BlockMatrix<f64>;
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type ScalingCoefficients = blockmat::ScalingCoefficients<f64>;
