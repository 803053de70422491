//! Cost-weighted linear SVM training and pool-based active learning for
//! imbalanced binary classification.
//!
//! The crate has five pieces:
//!
//! - [`dataset`]: sparse feature vectors, the SVM-light text format, and
//!   reproducible splits.
//! - [`svm`]: a dual coordinate-descent solver for the soft-margin linear
//!   SVM with separate slack penalties `C+` / `C-` per class.
//! - [`cost_policy`]: strategies for choosing the cost ratio `PA = C+/C-`
//!   each active-learning round (freeze it from an initial unbiased sample,
//!   recompute it from the current labeled set, fix it, leave costs equal,
//!   or balance classes by duplicating minority points), plus the
//!   sample-size statistics for proportion estimates.
//! - [`al_engine`]: the pool-based loop — train with the policy's cost
//!   model, pick the unlabeled points closest to the hyperplane, query the
//!   oracle, repeat — with support for using different cost models for
//!   sampling and for prediction.
//! - [`harness`]: metrics, cross-validation, multi-arm experiments,
//!   synthetic data generation, and CSV/JSON result emission.

pub mod al_engine;
pub mod cost_policy;
pub mod dataset;
pub mod harness;
pub mod svm;

pub use al_engine::{ALConfig, ALTrace, RoundRecord};
pub use cost_policy::CostPolicy;
pub use dataset::{Dataset, Label, LabeledExample, SparseVector};
pub use harness::{EvalMetrics, ExperimentSpec};
pub use svm::{CostFactors, LinearModel, SolverOptions};
