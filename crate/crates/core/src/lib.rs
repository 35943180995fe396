//! Projection-averaged Cramér–von Mises two-sample statistics and relatives,
//! permutation calibration, the angular distance, projection-averaged
//! dependence coefficients and a simulation harness.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiations.

pub mod angular_distance;
pub mod dependence;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matrix;
pub mod permutation;
pub mod rng;
pub mod scalar;
pub mod two_sample;

pub use error::{Error, Result};
pub use geometry::{AngleConfig, QuadratureConfig};
pub use matrix::SampleMatrix;
pub use rng::RandomStream;
pub use scalar::Scalar;

/// Sample matrix in double precision.
pub type Sample = SampleMatrix<f64>;
/// Sample matrix in single precision.
pub type Sample32 = SampleMatrix<f32>;
/// Pooled two-sample data in double precision.
pub type Pooled = two_sample::PooledSample<f64>;
/// Paired (X, Y) data in double precision.
pub type Paired = dependence::PairedSample<f64>;
/// Angle configuration in double precision.
pub type AngleConfig64 = AngleConfig<f64>;
