//! Confusion counts and the precision/recall/F1 ratios derived from them.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabeledExample};
use crate::harness::HarnessError;
use crate::svm::LinearModel;

/// Confusion counts with their derived ratios. Zero denominators yield 0:
/// `precision = tp/(tp+fp)`, `recall = tp/(tp+fn)`, and `f1` is their
/// harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalMetrics {
    pub fn from_counts(true_pos: usize, false_pos: usize, false_neg: usize, true_neg: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(true_pos, true_pos + false_pos);
        let recall = ratio(true_pos, true_pos + false_neg);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalMetrics {
            true_pos,
            false_pos,
            false_neg,
            true_neg,
            precision,
            recall,
            f1,
        }
    }

    /// Counts a model's predictions over a slice of labeled examples.
    pub fn of(model: &LinearModel, examples: &[LabeledExample]) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for ex in examples {
            let predicted_pos = model.predict(&ex.features).is_positive();
            match (ex.label.is_positive(), predicted_pos) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        EvalMetrics::from_counts(tp, fp, fn_, tn)
    }
}

/// Evaluates a model on a non-empty test set.
pub fn evaluate(model: &LinearModel, test: &Dataset) -> Result<EvalMetrics, HarnessError> {
    if test.is_empty() {
        return Err(HarnessError::EmptyTest);
    }
    Ok(EvalMetrics::of(model, test.examples()))
}
