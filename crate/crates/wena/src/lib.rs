//! Cohort ingestion, file formats, run configuration and the command line
//! for the `wena_core` pipeline.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod run;
pub mod synth;

pub use config::RunConfig;
pub use error::{Result, Stage, WenaError};
pub use run::run_experiment;
