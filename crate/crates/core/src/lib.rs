//! Numerical core for predicting a behavioral score from ROI time series.
//!
//! The pipeline runs: connectivity estimation ([`connectivity`]), proportional
//! thresholding and graph indices ([`graph`]), autoencoder compression
//! ([`encoder`]), and a weighted stacking ensemble with model fusion
//! ([`ensemble`]) built on four base regressors ([`regressors`]).
//! [`evaluation`] holds metrics, fold splitting, cross-validation and
//! RReliefF ranking; [`synthetic`] generates cohorts with a planted signal.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, cohort
//! manifests and the command line live in the `wena` crate.
#![no_std]
#![deny(unused_must_use)]
// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod connectivity;
pub mod encoder;
pub mod ensemble;
mod error;
pub mod evaluation;
pub mod graph;
pub mod ingest;
pub mod linalg;
mod matrix;
pub mod pipeline;
pub mod regressors;
pub mod rng;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use matrix::{FeatureMatrix, Matrix};
