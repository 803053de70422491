//! Cost-weighted soft-margin linear SVM trained by dual coordinate descent.
//!
//! The trained hyperplane minimizes
//!
//! ```text
//! 1/2 ||w||^2  +  C+ * sum of positive-example slacks  +  C- * sum of negative-example slacks
//! subject to   y_k (w . x_k + b) >= 1 - xi_k
//! ```
//!
//! The bias is handled by augmenting every feature vector with a constant
//! component of value 1 at a reserved slot, which turns the dual into a pure
//! box-constrained QP (`0 <= alpha_i <= C+` for positive examples, `<= C-`
//! for negative ones). The resulting `b` is therefore mildly regularized:
//! the objective actually solved is `1/2 (||w||^2 + b^2) + ...`, and that is
//! the quantity stored in [`LinearModel::primal_objective`] and used for the
//! duality-gap convergence check. [`primal_objective`] (the free function)
//! reports the unaugmented textbook value.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{LabeledExample, SparseVector};

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("single-class training set")]
    SingleClass,
    #[error("{0}")]
    InvalidArgument(String),
}

/// Slack penalties `C+` (positive class) and `C-` (negative class).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFactors {
    cost_pos: f64,
    cost_neg: f64,
}

impl CostFactors {
    pub fn new(cost_pos: f64, cost_neg: f64) -> Result<Self, SvmError> {
        if !(cost_pos > 0.0 && cost_pos.is_finite()) || !(cost_neg > 0.0 && cost_neg.is_finite()) {
            return Err(SvmError::InvalidArgument(format!(
                "cost factors must be finite and positive, got C+={cost_pos}, C-={cost_neg}"
            )));
        }
        Ok(CostFactors { cost_pos, cost_neg })
    }

    /// `C+ = pa * cost_neg`, `C- = cost_neg`.
    pub fn from_pa(pa: f64, cost_neg: f64) -> Result<Self, SvmError> {
        CostFactors::new(pa * cost_neg, cost_neg)
    }

    pub fn cost_pos(&self) -> f64 {
        self.cost_pos
    }

    pub fn cost_neg(&self) -> f64 {
        self.cost_neg
    }

    /// The cost ratio `C+ / C-`.
    pub fn pa(&self) -> f64 {
        self.cost_pos / self.cost_neg
    }

    /// Box upper bound for an example of the given label.
    pub fn bound_for(&self, label: crate::dataset::Label) -> f64 {
        if label.is_positive() {
            self.cost_pos
        } else {
            self.cost_neg
        }
    }
}

/// Convergence and reproducibility knobs for [`train`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative duality-gap threshold: stop once
    /// `(primal - dual) / (1 + |primal|) <= tolerance`.
    pub tolerance: f64,
    /// Upper bound on passes over the data.
    pub max_epochs: usize,
    /// Seed for the per-epoch random permutation of update order.
    pub shuffle_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-6,
            max_epochs: 10_000,
            shuffle_seed: 0,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), SvmError> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(SvmError::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(SvmError::InvalidArgument("max_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained hyperplane `(w, b)` with solver diagnostics.
///
/// `weights[i]` is the weight of feature index `i + 1`. `duals` holds one
/// multiplier per training example, in training order; each lies in
/// `[0, C+]` or `[0, C-]` according to the example's class, and
/// `w = sum_i duals[i] * y_i * x_i` within floating-point tolerance (`b`
/// likewise with `x_i` replaced by the constant bias component).
/// `primal_objective`/`dual_objective` are the objective values of the
/// solved (bias-regularized) problem; their gap is the convergence measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub duals: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub converged: bool,
    pub epochs_run: usize,
}

impl LinearModel {
    /// Hyperplane with the given weights and bias and no diagnostics; handy
    /// for evaluating a known plane.
    pub fn from_hyperplane(weights: Vec<f64>, bias: f64) -> Self {
        LinearModel {
            weights,
            bias,
            duals: Vec::new(),
            primal_objective: 0.0,
            dual_objective: 0.0,
            converged: true,
            epochs_run: 0,
        }
    }

    /// `w . x + b`; feature indices beyond the model dimension contribute 0.
    pub fn decision_value(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    /// Sign of the decision value; a value of exactly 0 maps to `+1`.
    pub fn predict(&self, x: &SparseVector) -> crate::dataset::Label {
        if self.decision_value(x) >= 0.0 {
            crate::dataset::Label::Positive
        } else {
            crate::dataset::Label::Negative
        }
    }

    /// Hinge violation `max(0, 1 - y (w . x + b))`.
    pub fn slack(&self, example: &LabeledExample) -> f64 {
        (1.0 - example.label.sign() * self.decision_value(&example.features)).max(0.0)
    }

    /// `primal - dual` of the solved problem, relative to `1 + |primal|`.
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective) / (1.0 + self.primal_objective.abs())
    }

    /// Text dump: line 1 `bias <value>`, then `index value` per nonzero weight.
    pub fn write_text(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "bias {}", self.bias)?;
        for (i, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                writeln!(out, "{} {}", i + 1, w)?;
            }
        }
        Ok(())
    }
}

/// The default negative-class penalty: `1 / mean_i(x_i . x_i)` over the
/// training set (the convention of the usual command-line SVM tools).
/// Falls back to 1.0 when the mean squared norm is zero.
pub fn default_cost_neg(data: &[LabeledExample]) -> f64 {
    if data.is_empty() {
        return 1.0;
    }
    let mean: f64 =
        data.iter().map(|e| e.features.norm_sq()).sum::<f64>() / data.len() as f64;
    if mean > 0.0 {
        1.0 / mean
    } else {
        1.0
    }
}

/// Textbook primal value `1/2 ||w||^2 + C+ * sum(pos slacks) + C- * sum(neg slacks)`
/// of a model on a dataset. Note this excludes the solver's `b^2/2`
/// regularization term; see the module docs.
pub fn primal_objective(model: &LinearModel, data: &[LabeledExample], costs: &CostFactors) -> f64 {
    let reg = 0.5 * model.weights.iter().map(|w| w * w).sum::<f64>();
    let slack_cost: f64 = data
        .iter()
        .map(|e| costs.bound_for(e.label) * model.slack(e))
        .sum();
    reg + slack_cost
}

/// Largest violation of the optimality conditions across the training set:
/// for each example, `alpha = 0` requires `y f(x) >= 1`, an interior `alpha`
/// requires `y f(x) = 1`, and `alpha` at its bound requires `y f(x) <= 1`,
/// all up to the returned magnitude.
pub fn kkt_max_violation(model: &LinearModel, data: &[LabeledExample], costs: &CostFactors) -> f64 {
    let mut worst = 0.0f64;
    for (ex, &alpha) in data.iter().zip(&model.duals) {
        let margin = ex.label.sign() * model.decision_value(&ex.features);
        let bound = costs.bound_for(ex.label);
        let v = if alpha <= 0.0 {
            1.0 - margin // y f >= 1
        } else if alpha >= bound {
            margin - 1.0 // y f <= 1
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v.max(0.0));
    }
    worst
}

/// Trains a cost-weighted linear SVM by dual coordinate descent.
///
/// Requires at least one example of each class. The update order is a fresh
/// random permutation per epoch drawn from `opts.shuffle_seed`, so identical
/// inputs yield bit-identical models. Convergence is declared when the
/// relative duality gap of the solved problem drops below `opts.tolerance`;
/// otherwise training stops at `opts.max_epochs` with `converged = false`
/// and the last gap left in the objective fields.
pub fn train(
    data: &[LabeledExample],
    costs: &CostFactors,
    opts: &SolverOptions,
) -> Result<LinearModel, SvmError> {
    opts.validate()?;
    if data.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    let n_pos = data.iter().filter(|e| e.label.is_positive()).count();
    if n_pos == 0 || n_pos == data.len() {
        return Err(SvmError::SingleClass);
    }

    let n = data.len();
    let dim = data
        .iter()
        .map(|e| e.features.max_index())
        .max()
        .unwrap_or(0) as usize;

    // Diagonal of the augmented Gram matrix: x_i . x_i plus 1 for the bias
    // component.
    let diag: Vec<f64> = data.iter().map(|e| e.features.norm_sq() + 1.0).collect();
    let bounds: Vec<f64> = data.iter().map(|e| costs.bound_for(e.label)).collect();
    let signs: Vec<f64> = data.iter().map(|e| e.label.sign()).collect();

    let mut alpha = vec![0.0f64; n];
    let mut weights = vec![0.0f64; dim];
    let mut bias = 0.0f64;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();

    let mut primal = f64::INFINITY;
    let mut dual = f64::NEG_INFINITY;
    let mut converged = false;
    let mut epochs_run = 0;

    for _ in 0..opts.max_epochs {
        epochs_run += 1;
        order.shuffle(&mut rng);

        for &i in &order {
            let ex = &data[i];
            let grad = signs[i] * (ex.features.dot_dense(&weights) + bias) - 1.0;
            let next = (alpha[i] - grad / diag[i]).clamp(0.0, bounds[i]);
            let delta = next - alpha[i];
            if delta != 0.0 {
                let step = delta * signs[i];
                for (idx, val) in ex.features.iter() {
                    weights[idx as usize - 1] += step * val;
                }
                bias += step;
                alpha[i] = next;
            }
        }

        // Rebuild (w, b) from the multipliers to keep the reconstruction
        // identity tight before measuring the gap.
        reconstruct(data, &alpha, &signs, &mut weights, &mut bias);

        let reg_aug = 0.5 * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
        let slack_cost: f64 = data
            .iter()
            .enumerate()
            .map(|(i, ex)| {
                let f = ex.features.dot_dense(&weights) + bias;
                bounds[i] * (1.0 - signs[i] * f).max(0.0)
            })
            .sum();
        primal = reg_aug + slack_cost;
        dual = alpha.iter().sum::<f64>() - reg_aug;

        if primal - dual <= opts.tolerance * (1.0 + primal.abs()) {
            converged = true;
            break;
        }
    }

    Ok(LinearModel {
        weights,
        bias,
        duals: alpha,
        primal_objective: primal,
        dual_objective: dual,
        converged,
        epochs_run,
    })
}

fn reconstruct(
    data: &[LabeledExample],
    alpha: &[f64],
    signs: &[f64],
    weights: &mut [f64],
    bias: &mut f64,
) {
    weights.fill(0.0);
    *bias = 0.0;
    for (i, ex) in data.iter().enumerate() {
        if alpha[i] != 0.0 {
            let coef = alpha[i] * signs[i];
            for (idx, val) in ex.features.iter() {
                weights[idx as usize - 1] += coef * val;
            }
            *bias += coef;
        }
    }
}
