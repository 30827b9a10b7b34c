//! Robust multi-class classification by regularized maximum correntropy.
//!
//! One affine predictor per class is trained against ±1 class indicators.
//! Instead of a squared or hinge loss, the fit is scored with correntropy,
//! a bounded Gaussian similarity between predictions and indicators, so
//! samples with implausible labels contribute little. Training alternates a
//! closed-form reweighting step with a weighted ridge solve.
//!
//! Modules:
//! - [`dataset`]: data model, CSV ingestion, splits, folds, label noise
//! - [`kernels`]: linear and kernel sample representations
//! - [`correntropy`]: Gaussian similarity, estimator, objective
//! - [`regmaxcem`]: the half-quadratic trainer
//! - [`baselines`]: square, hinge and logistic one-vs-all trainers
//! - [`eval`]: accuracy, ROC/PR curves, AUC, paired t-test
//! - [`harness`]: synthetic data and the experiment runner

pub mod baselines;
pub mod correntropy;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod harness;
pub mod kernels;
mod linalg;
pub mod model;
pub mod regmaxcem;
pub mod rng;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use model::Model;
