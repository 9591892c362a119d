//! Sparse regression and automated material model discovery.
//!
//! This crate solves L1-regularized regression problems of the form
//! `min_w f(w) + alpha * ||w||_1` and applies them to the discovery of
//! incompressible hyperelastic material models from uniaxial
//! tension/compression and simple shear data.
//!
//! Solvers:
//! * [`sparse::cd_solve`] — coordinate descent for a quadratic mismatch at a
//!   fixed `alpha`,
//! * [`sparse::lars_path`] / [`sparse::lars_lasso_path`] — least angle
//!   regression; the LASSO variant computes the exact piecewise-linear
//!   regularization path,
//! * [`proximal::ista_solve`] — proximal gradient iteration for an arbitrary
//!   differentiable mismatch,
//! * [`proximal::pathwise_ista`] — warm-started ISTA over a decreasing
//!   `alpha` schedule.
//!
//! The material side ([`hyperelastic`], [`datasets`], [`discovery`]) builds
//! generalized Mooney-Rivlin + Ogden strain-energy libraries, closed-form
//! stress maps for the two load cases, synthetic benchmark data, and the
//! end-to-end discovery pipelines with the unregularized debias refit.
//!
//! All numerical code is generic over the scalar type through the [`Float`]
//! trait; `f64` aliases for the main types live at the crate root.

pub mod datasets;
pub mod discovery;
mod error;
mod float;
pub mod hyperelastic;
mod linalg;
pub mod path;
pub mod proximal;
pub mod sparse;

pub use error::{Error, Result};
pub use float::Float;
pub use linalg::Matrix;
pub use path::{Path, PathKnot};

/// `f64` quadratic problem.
pub type Problem64 = sparse::QuadraticProblem<f64>;
/// `f32` quadratic problem.
pub type Problem32 = sparse::QuadraticProblem<f32>;
/// `f64` regularization path.
pub type Path64 = path::Path<f64>;
/// `f32` regularization path.
pub type Path32 = path::Path<f32>;
/// `f64` stress dataset.
pub type Dataset64 = hyperelastic::Dataset<f64>;
/// `f64` material parameters.
pub type MaterialParams64 = hyperelastic::MaterialParams<f64>;
/// `f64` discovery report.
pub type DiscoveryReport64 = discovery::DiscoveryReport<f64>;
