//! Config-driven experiments for the `sbqs` simulator.

pub mod config;
pub mod experiment;
pub mod output;

use thiserror::Error;

pub use config::{load_config, ExperimentConfig};
pub use experiment::{evaluate_bounds, run_experiment, Experiment, ResultRow};
pub use output::{emit_csv, emit_svg, parse_csv};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Numeric(#[from] sbqs::Error),

    #[error("i/o: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numeric(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }
}
