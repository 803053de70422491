//! Independent reference solver for the box-constrained SVM dual, used to
//! cross-check the production solver. It shares nothing with the
//! implementation under test: examples are densified up front (with the
//! same trailing bias-augmentation component of 1), the Gram matrix is
//! materialized, and the dual is maximized by accelerated projected
//! gradient ascent with adaptive restarts.

use alsvm::dataset::LabeledExample;
use alsvm::svm::CostFactors;

pub struct ReferenceSolution {
    pub alpha: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub max_projected_gradient: f64,
}

impl ReferenceSolution {
    pub fn decision_value(&self, x: &alsvm::dataset::SparseVector) -> f64 {
        let mut f = self.bias;
        for (idx, val) in x.iter() {
            let i = idx as usize - 1;
            if i < self.weights.len() {
                f += self.weights[i] * val;
            }
        }
        f
    }
}

fn densify(data: &[LabeledExample], dim: usize) -> Vec<Vec<f64>> {
    data.iter()
        .map(|e| {
            let mut row = vec![0.0; dim + 1];
            for (idx, val) in e.features.iter() {
                row[idx as usize - 1] = val;
            }
            row[dim] = 1.0; // bias component
            row
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn spectral_norm(q: &[Vec<f64>]) -> f64 {
    let n = q.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut qv: Vec<f64> = (0..n).map(|i| dot(&q[i], &v)).collect();
        let norm = dot(&qv, &qv).sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        for x in &mut qv {
            *x /= norm;
        }
        lambda = norm;
        v = qv;
    }
    lambda
}

/// Solves `max_alpha sum(alpha) - 1/2 alpha' Q alpha` over the box
/// `0 <= alpha_i <= C_{y_i}` with `Q_ij = y_i y_j (x_i . x_j + 1)`.
pub fn solve_reference_qp(data: &[LabeledExample], costs: &CostFactors) -> ReferenceSolution {
    let n = data.len();
    let dim = data
        .iter()
        .map(|e| e.features.max_index())
        .max()
        .unwrap_or(0) as usize;
    let rows = densify(data, dim);
    let signs: Vec<f64> = data.iter().map(|e| e.label.sign()).collect();
    let bounds: Vec<f64> = data.iter().map(|e| costs.bound_for(e.label)).collect();

    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| signs[i] * signs[j] * dot(&rows[i], &rows[j]))
                .collect()
        })
        .collect();

    let step = 1.0 / (spectral_norm(&q).max(1e-12) * 1.05);

    let clamp = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .enumerate()
            .map(|(i, a)| a.clamp(0.0, bounds[i]))
            .collect()
    };
    let grad_at = |alpha: &[f64]| -> Vec<f64> {
        (0..n).map(|i| 1.0 - dot(&q[i], alpha)).collect()
    };
    let projected_gradient_norm = |alpha: &[f64], grad: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let pg = if alpha[i] <= 0.0 {
                grad[i].max(0.0)
            } else if alpha[i] >= bounds[i] {
                (-grad[i]).max(0.0)
            } else {
                grad[i].abs()
            };
            worst = worst.max(pg);
        }
        worst
    };

    let mut alpha = vec![0.0; n];
    let mut momentum = alpha.clone();
    let mut t = 1.0f64;
    let mut pg_norm = f64::INFINITY;

    for iter in 0..500_000 {
        let grad = grad_at(&momentum);
        let next: Vec<f64> = clamp(
            (0..n)
                .map(|i| momentum[i] + step * grad[i])
                .collect(),
        );

        // Restart the momentum sequence when it points against progress.
        let against: f64 = (0..n)
            .map(|i| (momentum[i] - next[i]) * (next[i] - alpha[i]))
            .sum();
        if against > 0.0 {
            t = 1.0;
            momentum = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            momentum = (0..n)
                .map(|i| next[i] + ((t - 1.0) / t_next) * (next[i] - alpha[i]))
                .collect();
            t = t_next;
        }
        alpha = next;

        if iter % 50 == 0 {
            let g = grad_at(&alpha);
            pg_norm = projected_gradient_norm(&alpha, &g);
            if pg_norm <= 1e-12 {
                break;
            }
        }
    }

    let mut w_aug = vec![0.0; dim + 1];
    for i in 0..n {
        let coef = alpha[i] * signs[i];
        for (j, x) in rows[i].iter().enumerate() {
            w_aug[j] += coef * x;
        }
    }
    let reg = 0.5 * dot(&w_aug, &w_aug);
    let slack_cost: f64 = (0..n)
        .map(|i| bounds[i] * (1.0 - signs[i] * dot(&w_aug, &rows[i])).max(0.0))
        .sum();
    let dual_objective = alpha.iter().sum::<f64>() - reg;

    let bias = w_aug[dim];
    let weights = w_aug[..dim].to_vec();
    ReferenceSolution {
        alpha,
        weights,
        bias,
        primal_objective: reg + slack_cost,
        dual_objective,
        max_projected_gradient: pg_norm,
    }
}
