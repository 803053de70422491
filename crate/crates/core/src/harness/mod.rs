//! Experiment orchestration: evaluation metrics, cross-validation and
//! multi-arm runs, learning-curve aggregation, synthetic data, and result
//! emission.

pub mod experiment;
pub mod metrics;
pub mod synth;

pub use experiment::{
    curve_table, load_bundle, load_dataset, run_experiment, run_experiment_on, write_bundle,
    ArmResult, ArmSpec, CurveTable, ExperimentBundle, ExperimentSpec, Protocol,
};
pub use metrics::{evaluate, EvalMetrics};
pub use synth::{generate_two_gaussians, SynthParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("empty test set")]
    EmptyTest,
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: Box<HarnessError>,
    },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
    #[error(transparent)]
    Engine(#[from] crate::al_engine::EngineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Attaches a file path to an error for CLI-friendly diagnostics.
    pub fn at(self, path: &std::path::Path) -> HarnessError {
        HarnessError::File {
            path: path.display().to_string(),
            source: Box::new(self),
        }
    }
}
