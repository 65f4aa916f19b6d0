//! Experiment runners, model input and output writers behind the `obproj`
//! binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod model;
pub mod output;
pub mod session;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run_custom, run_diffraction, run_oscillators, ExperimentReport};
