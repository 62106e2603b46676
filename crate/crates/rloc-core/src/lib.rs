//! Numerics for integrating against the local time of symmetric α-stable
//! processes: path simulation, local-time estimation, fractional calculus,
//! p-variation, Young and rough-path integrals, and an Itô-formula harness.
//!
//! The crate is `no_std` (with `alloc`); file formats, parallel ensembles and
//! the command line live in the companion `rloc` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
pub mod frac_calc;
pub mod grid;
pub mod ito_verify;
pub mod local_time;
pub mod quad;
pub mod rough_path;
pub mod special;
pub mod stable_process;
pub mod variation;
pub mod young;

pub use error::{Error, Result};
pub use grid::{Analytic, GridFunction, JumpTag};
pub use local_time::LocalTimeField;
pub use rough_path::{LiftMap, TensorLevels, TwoPath};
pub use stable_process::{Alpha, Jump, SamplePath};
pub use variation::{ControlFunction, Partition};
