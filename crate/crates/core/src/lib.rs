//! Manifold-valued time-series models for symmetric positive definite
//! covariance matrices.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see [`Scalar`]);
//! the `f64` aliases at the crate root are what the command-line front end uses.

pub mod error;
pub mod geometry;
pub mod inference;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{Geometry, MatrixFn, Tangent};
pub use inference::Restriction;
pub use model::ModelKind;
pub use pipeline::ReductionKind;
pub use scalar::Scalar;

pub type SymMatrix = geometry::SymMatrix<f64>;
pub type SpdPoint = geometry::SpdPoint<f64>;
pub type CovSeries = model::CovSeries<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type ScalarParams = model::ScalarParams<f64>;
pub type DiagParams = model::DiagParams<f64>;
pub type TangentDataset = model::TangentDataset<f64>;
pub type FitResult = inference::FitResult<f64>;
pub type SignalMatrix = pipeline::SignalMatrix<f64>;
pub type ReductionPlan = pipeline::ReductionPlan<f64>;
