//! Experiment runner around `rloc-core`: configuration, file formats,
//! parallel ensembles and the pipelines behind the `rloc` binary.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod run;

pub use config::{Config, Experiment, SCHEMA};
pub use error::CliError;
pub use run::{run, Outcome};
