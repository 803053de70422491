//! The pool-based active-learning loop: train with the policy's cost model,
//! select the unlabeled points closest to the hyperplane, query the oracle,
//! move them into the labeled set, repeat.
//!
//! Each round `r` is recorded *before* its batch is absorbed, so record 0
//! describes the seed set alone and the final record describes the fully
//! grown labeled set (it selects nothing). Sampling and prediction may use
//! different cost policies; when they coincide the second training is
//! skipped and the trace is identical to the single-model pathway.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_policy::{oversample_duplicate, CostPolicy, PolicyError};
use crate::dataset::{
    class_counts, split_initial_indices, Dataset, DatasetError, Label, LabeledExample,
};
use crate::harness::metrics::EvalMetrics;
use crate::svm::{default_cost_neg, train, CostFactors, LinearModel, SolverOptions, SvmError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("pool has {pool} examples but seed_size is {seed_size}")]
    PoolTooSmall { pool: usize, seed_size: usize },
    #[error("seed split is single-class ({n_pos} pos / {n_neg} neg); change rng_seed or seed_size")]
    SingleClassSeed { n_pos: usize, n_neg: usize },
    #[error("empty pool")]
    EmptyPool,
    #[error("round {round}: {source}")]
    Solver { round: usize, source: SvmError },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Configuration for one active-learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ALConfig {
    /// Points queried per round (`k`).
    pub batch_size: usize,
    /// Size of the initial uniform random labeled sample.
    pub seed_size: usize,
    /// Cap on the number of selection rounds; `None` runs to pool exhaustion.
    pub max_rounds: Option<usize>,
    /// When false, `max_rounds` must be set (the pool running dry still ends
    /// the loop early).
    pub stop_when_pool_empty: bool,
    /// Cost policy for the hyperplane that selects batches.
    pub sampling_policy: CostPolicy,
    /// Cost policy for the hyperplane evaluated on test data; `None` reuses
    /// the sampling policy (and its models).
    pub prediction_policy: Option<CostPolicy>,
    /// Seed for the initial split and any resampling transforms.
    pub rng_seed: u64,
    pub solver_options: SolverOptions,
    /// Negative-class penalty, fixed for the whole run; `None` computes the
    /// solver default from the seed set.
    pub cost_neg: Option<f64>,
    /// Evaluate on the test set every this many rounds (the final round is
    /// always evaluated).
    pub eval_stride: usize,
    /// Keep every round's prediction model in the trace, not just the final
    /// one.
    pub retain_round_models: bool,
}

impl Default for ALConfig {
    fn default() -> Self {
        ALConfig {
            batch_size: 20,
            seed_size: 100,
            max_rounds: None,
            stop_when_pool_empty: true,
            sampling_policy: CostPolicy::init_pa(),
            prediction_policy: None,
            rng_seed: 0,
            solver_options: SolverOptions::default(),
            cost_neg: None,
            eval_stride: 1,
            retain_round_models: false,
        }
    }
}

impl ALConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.batch_size == 0 {
            return Err(EngineError::Config("batch_size must be >= 1".into()));
        }
        if self.seed_size < 2 {
            return Err(EngineError::Config("seed_size must be >= 2".into()));
        }
        if self.eval_stride == 0 {
            return Err(EngineError::Config("eval_stride must be >= 1".into()));
        }
        if !self.stop_when_pool_empty && self.max_rounds.is_none() {
            return Err(EngineError::Config(
                "max_rounds is required when stop_when_pool_empty is off".into(),
            ));
        }
        if let Some(c) = self.cost_neg {
            if !(c > 0.0 && c.is_finite()) {
                return Err(EngineError::Config(format!(
                    "cost_neg must be finite and positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Simulated labeler: answers label queries from withheld truth.
#[derive(Debug, Clone)]
pub struct Oracle {
    truth: Vec<Label>,
}

impl Oracle {
    pub fn from_dataset(data: &Dataset) -> Self {
        Oracle {
            truth: data.examples().iter().map(|e| e.label).collect(),
        }
    }

    pub fn label_of(&self, id: usize) -> Label {
        self.truth[id]
    }
}

/// What happened in one round, captured before its batch was absorbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pa_sampling: f64,
    pub pa_prediction: f64,
    pub n_pos_labeled: usize,
    pub n_neg_labeled: usize,
    /// Indices into the input pool dataset, closest to the hyperplane first.
    pub selected: Vec<usize>,
    pub labeled_pos_fraction: f64,
    pub metrics: Option<EvalMetrics>,
    /// True when a single-class labeled set forced reuse of the previous
    /// round's PA.
    pub pa_fallback: bool,
}

/// Full record of an active-learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALTrace {
    pub config: ALConfig,
    /// Indices of the initial labeled sample within the input dataset.
    pub seed_ids: Vec<usize>,
    /// The negative-class penalty actually used (fixed for the run).
    pub cost_neg_used: f64,
    pub rounds: Vec<RoundRecord>,
    /// Prediction model of the last round.
    pub final_model: LinearModel,
    /// Per-round prediction models when `retain_round_models` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_models: Option<Vec<LinearModel>>,
}

impl ALTrace {
    pub fn labeled_size(&self, round: usize) -> usize {
        let r = &self.rounds[round];
        r.n_pos_labeled + r.n_neg_labeled
    }

    /// CSV view of the trace:
    /// `round,labeled_size,pa_sampling,pa_prediction,pos_fraction,precision,recall,f1`
    /// with empty metric cells for unevaluated rounds.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("round,labeled_size,pa_sampling,pa_prediction,pos_fraction,precision,recall,f1\n");
        for r in &self.rounds {
            let (p, rc, f1) = match &r.metrics {
                Some(m) => (m.precision.to_string(), m.recall.to_string(), m.f1.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.round,
                r.n_pos_labeled + r.n_neg_labeled,
                r.pa_sampling,
                r.pa_prediction,
                r.labeled_pos_fraction,
                p,
                rc,
                f1
            ));
        }
        out
    }
}

/// The `(round, labeled_pos_fraction)` series showing how selection skews
/// the labeled class distribution.
pub fn skew_series(trace: &ALTrace) -> Vec<(usize, f64)> {
    trace
        .rounds
        .iter()
        .map(|r| (r.round, r.labeled_pos_fraction))
        .collect()
}

/// Picks the `min(k, |pool|)` pool examples with the smallest absolute
/// decision value, closest first, ties broken by lower pool index. Returns
/// indices into `pool`.
pub fn select_batch(
    model: &LinearModel,
    pool: &Dataset,
    k: usize,
) -> Result<Vec<usize>, EngineError> {
    if pool.is_empty() {
        return Err(EngineError::EmptyPool);
    }
    let mut scored: Vec<(f64, usize)> = pool
        .examples()
        .iter()
        .enumerate()
        .map(|(i, e)| (model.decision_value(&e.features).abs(), i))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Policy plus the paper trail needed for the single-class fallback: when a
/// mid-run query is undefined, the previous round's PA is reused and the
/// round flagged.
struct PolicyRuntime {
    policy: CostPolicy,
    last_pa: Option<f64>,
}

impl PolicyRuntime {
    fn new(policy: CostPolicy) -> Self {
        PolicyRuntime {
            policy,
            last_pa: None,
        }
    }

    fn pa_for(&mut self, labeled: &Dataset, round: usize) -> Result<(f64, bool), EngineError> {
        match self.policy.pa(labeled, round) {
            Ok(pa) => {
                self.last_pa = Some(pa);
                Ok((pa, false))
            }
            Err(PolicyError::UndefinedRatio { .. }) => match self.last_pa {
                Some(prev) => Ok((prev, true)),
                None => Err(EngineError::Config(format!(
                    "round {round}: labeled set is single-class and no previous PA exists"
                ))),
            },
            Err(other) => Err(other.into()),
        }
    }
}

fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn train_for_policy(
    labeled: &Dataset,
    policy: &CostPolicy,
    pa: f64,
    cost_neg: f64,
    config: &ALConfig,
    round: usize,
    purpose: u64,
) -> Result<LinearModel, EngineError> {
    let wrap = |source| EngineError::Solver { round, source };
    let opts = &config.solver_options;
    if policy.uses_oversampling() {
        let transformed =
            oversample_duplicate(labeled, derive_seed(config.rng_seed, round as u64, purpose))?;
        let costs = CostFactors::new(cost_neg, cost_neg).map_err(wrap)?;
        train(transformed.examples(), &costs, opts).map_err(wrap)
    } else {
        let costs = CostFactors::from_pa(pa, cost_neg).map_err(wrap)?;
        train(labeled.examples(), &costs, opts).map_err(wrap)
    }
}

/// Runs the full loop on a pool whose labels act as the withheld oracle,
/// optionally evaluating the prediction model on `test` each round. The
/// trace is bit-reproducible from `(pool_with_truth, config, test)`.
pub fn run_al(
    pool_with_truth: &Dataset,
    config: &ALConfig,
    test: Option<&Dataset>,
) -> Result<ALTrace, EngineError> {
    config.validate()?;
    let n = pool_with_truth.len();
    if n < config.seed_size {
        return Err(EngineError::PoolTooSmall {
            pool: n,
            seed_size: config.seed_size,
        });
    }
    if let Some(t) = test {
        if t.is_empty() {
            return Err(EngineError::Config("test set is empty".into()));
        }
    }

    let oracle = Oracle::from_dataset(pool_with_truth);
    let (seed_ids, mut unlabeled) =
        split_initial_indices(n, config.seed_size, config.rng_seed)?;
    let mut labeled_ids = seed_ids.clone();

    let gather = |ids: &[usize]| -> Dataset {
        Dataset::new(
            ids.iter()
                .map(|&id| {
                    LabeledExample::new(
                        pool_with_truth.examples()[id].features.clone(),
                        oracle.label_of(id),
                    )
                })
                .collect(),
        )
    };

    let seed_set = gather(&seed_ids);
    let (seed_pos, seed_neg) = class_counts(&seed_set);
    if seed_pos == 0 || seed_neg == 0 {
        return Err(EngineError::SingleClassSeed {
            n_pos: seed_pos,
            n_neg: seed_neg,
        });
    }

    let sampling_policy = config.sampling_policy.initialized(&seed_set)?;
    let prediction_input = config.prediction_policy.unwrap_or(config.sampling_policy);
    let prediction_policy = prediction_input.initialized(&seed_set)?;
    let hybrid = prediction_policy != sampling_policy;

    let cost_neg = config
        .cost_neg
        .unwrap_or_else(|| default_cost_neg(seed_set.examples()));

    let mut sampling_rt = PolicyRuntime::new(sampling_policy);
    let mut prediction_rt = PolicyRuntime::new(prediction_policy);

    // Echo the config with the prediction policy resolved, so explicitly
    // passing the sampling policy and leaving it unset produce the same
    // trace bytes.
    let mut config_echo = config.clone();
    config_echo.prediction_policy = Some(prediction_input);

    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut round_models: Option<Vec<LinearModel>> =
        config.retain_round_models.then(Vec::new);
    let mut round = 0usize;

    loop {
        let labeled = gather(&labeled_ids);
        let (n_pos, n_neg) = class_counts(&labeled);

        let (pa_sampling, fb_sampling) = sampling_rt.pa_for(&labeled, round)?;
        let sampling_model =
            train_for_policy(&labeled, &sampling_policy, pa_sampling, cost_neg, config, round, 0)?;

        let (prediction_model, pa_prediction, fb_prediction) = if hybrid {
            let (pa, fb) = prediction_rt.pa_for(&labeled, round)?;
            let model =
                train_for_policy(&labeled, &prediction_policy, pa, cost_neg, config, round, 1)?;
            (model, pa, fb)
        } else {
            (sampling_model.clone(), pa_sampling, fb_sampling)
        };

        let done = unlabeled.is_empty()
            || config.max_rounds.is_some_and(|m| round >= m);

        let metrics = match test {
            Some(t) if done || round.is_multiple_of(config.eval_stride) => {
                Some(EvalMetrics::of(&prediction_model, t.examples()))
            }
            _ => None,
        };

        let selected: Vec<usize> = if done {
            Vec::new()
        } else {
            let pool_view = pool_with_truth.subset(&unlabeled);
            select_batch(&sampling_model, &pool_view, config.batch_size)?
                .into_iter()
                .map(|local| unlabeled[local])
                .collect()
        };

        rounds.push(RoundRecord {
            round,
            pa_sampling,
            pa_prediction,
            n_pos_labeled: n_pos,
            n_neg_labeled: n_neg,
            selected: selected.clone(),
            labeled_pos_fraction: n_pos as f64 / (n_pos + n_neg) as f64,
            metrics,
            pa_fallback: fb_sampling || fb_prediction,
        });
        if let Some(models) = &mut round_models {
            models.push(prediction_model.clone());
        }

        if done {
            return Ok(ALTrace {
                config: config_echo,
                seed_ids,
                cost_neg_used: cost_neg,
                rounds,
                final_model: prediction_model,
                round_models,
            });
        }

        let chosen: HashSet<usize> = selected.iter().copied().collect();
        labeled_ids.extend(selected);
        unlabeled.retain(|id| !chosen.contains(id));
        round += 1;
    }
}
