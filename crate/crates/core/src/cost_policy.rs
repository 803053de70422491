//! Per-round cost factors (the PA ratio `C+/C-`) and imbalance-correction
//! transforms, plus the sample-size statistics used to choose how large an
//! initial unbiased labeled sample should be.
//!
//! Five policies are supported:
//!
//! - `InitPa`: PA frozen at run start from the class ratio of the initial
//!   (unbiased) labeled sample, then held constant. Actively sampled data is
//!   skewed toward the positive class, so the current labeled set
//!   underestimates corpus imbalance; the frozen estimate does not.
//! - `CurrentPa`: PA recomputed each round from the current labeled set.
//! - `FixedPa(v)`: a user-supplied constant.
//! - `Balanced`: PA = 1; relies on the class balancing that active sampling
//!   itself induces, with no further correction.
//! - `OversampleDuplicate`: PA = 1, with minority positives duplicated until
//!   the classes balance exactly (see [`oversample_duplicate`]).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{class_counts, Dataset};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("undefined class ratio: {n_neg} negatives / {n_pos} positives")]
    UndefinedRatio { n_neg: usize, n_pos: usize },
    #[error("InitPa policy used before initialization from a seed set")]
    Uninitialized,
    #[error("{0}")]
    InvalidArgument(String),
}

/// The class-ratio heuristic: `PA = n_neg / n_pos`. Errors when either
/// count is zero; the caller decides the fallback.
pub fn morik_pa(n_neg: usize, n_pos: usize) -> Result<f64, PolicyError> {
    if n_pos == 0 || n_neg == 0 {
        return Err(PolicyError::UndefinedRatio { n_neg, n_pos });
    }
    Ok(n_neg as f64 / n_pos as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    InitPa,
    CurrentPa,
    FixedPa(f64),
    Balanced,
    OversampleDuplicate,
}

/// A strategy producing the cost ratio `PA = C+/C-` for each round.
///
/// Policies are immutable: [`CostPolicy::initialized`] returns a new value
/// with the InitPa ratio frozen from the seed set, and every later query is
/// a pure function of the arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostPolicy {
    kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frozen_pa: Option<f64>,
}

impl CostPolicy {
    pub fn init_pa() -> Self {
        CostPolicy {
            kind: PolicyKind::InitPa,
            frozen_pa: None,
        }
    }

    pub fn current_pa() -> Self {
        CostPolicy {
            kind: PolicyKind::CurrentPa,
            frozen_pa: None,
        }
    }

    pub fn fixed_pa(value: f64) -> Result<Self, PolicyError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(PolicyError::InvalidArgument(format!(
                "fixed PA must be finite and positive, got {value}"
            )));
        }
        Ok(CostPolicy {
            kind: PolicyKind::FixedPa(value),
            frozen_pa: None,
        })
    }

    pub fn balanced() -> Self {
        CostPolicy {
            kind: PolicyKind::Balanced,
            frozen_pa: None,
        }
    }

    pub fn oversample_duplicate() -> Self {
        CostPolicy {
            kind: PolicyKind::OversampleDuplicate,
            frozen_pa: None,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn frozen_pa(&self) -> Option<f64> {
        self.frozen_pa
    }

    /// True when the labeled set should be rebalanced by duplication before
    /// training instead of reweighting the objective.
    pub fn uses_oversampling(&self) -> bool {
        matches!(self.kind, PolicyKind::OversampleDuplicate)
    }

    /// Freezes an InitPa policy to the class ratio of `seed`; every other
    /// kind is returned unchanged. The seed set must contain both classes
    /// for InitPa.
    pub fn initialized(&self, seed: &Dataset) -> Result<CostPolicy, PolicyError> {
        match self.kind {
            PolicyKind::InitPa => {
                let (n_pos, n_neg) = class_counts(seed);
                Ok(CostPolicy {
                    kind: PolicyKind::InitPa,
                    frozen_pa: Some(morik_pa(n_neg, n_pos)?),
                })
            }
            _ => Ok(*self),
        }
    }

    /// The PA for a given round. `CurrentPa` reads the current labeled set;
    /// `InitPa` returns its frozen value regardless of the round; `FixedPa`
    /// its constant; `Balanced` and `OversampleDuplicate` return 1 (the
    /// latter corrects by resampling instead). A `CurrentPa` query on a
    /// single-class labeled set fails with [`PolicyError::UndefinedRatio`]
    /// so the engine can fall back to the previous round's value.
    pub fn pa(&self, labeled: &Dataset, _round: usize) -> Result<f64, PolicyError> {
        match self.kind {
            PolicyKind::InitPa => self.frozen_pa.ok_or(PolicyError::Uninitialized),
            PolicyKind::CurrentPa => {
                let (n_pos, n_neg) = class_counts(labeled);
                morik_pa(n_neg, n_pos)
            }
            PolicyKind::FixedPa(v) => Ok(v),
            PolicyKind::Balanced | PolicyKind::OversampleDuplicate => Ok(1.0),
        }
    }
}

impl std::fmt::Display for CostPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            PolicyKind::InitPa => write!(f, "initpa"),
            PolicyKind::CurrentPa => write!(f, "currentpa"),
            PolicyKind::FixedPa(v) => write!(f, "fixed:{v}"),
            PolicyKind::Balanced => write!(f, "balanced"),
            PolicyKind::OversampleDuplicate => write!(f, "oversample"),
        }
    }
}

impl std::str::FromStr for CostPolicy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "initpa" => Ok(CostPolicy::init_pa()),
            "currentpa" => Ok(CostPolicy::current_pa()),
            "balanced" => Ok(CostPolicy::balanced()),
            "oversample" | "oversample_duplicate" => Ok(CostPolicy::oversample_duplicate()),
            other => {
                if let Some(v) = other.strip_prefix("fixed:").or_else(|| other.strip_prefix("fixedpa:")) {
                    let value: f64 = v.parse().map_err(|_| {
                        PolicyError::InvalidArgument(format!("invalid fixed PA value {v:?}"))
                    })?;
                    CostPolicy::fixed_pa(value)
                } else {
                    Err(PolicyError::InvalidArgument(format!(
                        "unknown policy {s:?}; expected initpa, currentpa, fixed:<v>, balanced, or oversample"
                    )))
                }
            }
        }
    }
}

/// Rebalances a labeled set by duplicating positive examples until the
/// classes are exactly balanced: each positive is copied
/// `floor(n_neg / n_pos) - 1` extra times, then `n_neg mod n_pos` positives
/// chosen uniformly without replacement (seeded) receive one more copy.
/// Negatives and all original examples are retained unchanged, in their
/// original order, with duplicates appended. A set with at least as many
/// positives as negatives is returned as-is (duplication cannot reduce a
/// class).
pub fn oversample_duplicate(labeled: &Dataset, rng_seed: u64) -> Result<Dataset, PolicyError> {
    let (n_pos, n_neg) = class_counts(labeled);
    if n_pos == 0 || n_neg == 0 {
        return Err(PolicyError::InvalidArgument(format!(
            "oversampling needs both classes, got {n_pos} pos / {n_neg} neg"
        )));
    }
    if n_pos >= n_neg {
        return Ok(labeled.clone());
    }

    let pos_indices: Vec<usize> = labeled
        .examples()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label.is_positive())
        .map(|(i, _)| i)
        .collect();

    let copies = n_neg / n_pos; // total appearances for every positive
    let remainder = n_neg % n_pos;

    let extra_pass: Vec<usize> = {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut shuffled = pos_indices.clone();
        shuffled.shuffle(&mut rng);
        shuffled.truncate(remainder);
        shuffled.sort_unstable();
        shuffled
    };

    let mut out = labeled.examples().to_vec();
    for &i in &pos_indices {
        for _ in 1..copies {
            out.push(labeled.examples()[i].clone());
        }
    }
    for i in extra_pass {
        out.push(labeled.examples()[i].clone());
    }
    Ok(Dataset::new(out))
}

/// A proportion estimate with its sampling-error half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub n: u64,
    pub p_hat: f64,
    pub confidence: f64,
    pub population: Option<u64>,
    pub margin: f64,
}

impl ProportionEstimate {
    pub fn new(
        n: u64,
        p_hat: f64,
        confidence: f64,
        population: Option<u64>,
    ) -> Result<Self, PolicyError> {
        Ok(ProportionEstimate {
            n,
            p_hat,
            confidence,
            population,
            margin: proportion_margin(n, confidence, population, p_hat)?,
        })
    }
}

fn check_confidence(confidence: f64) -> Result<(), PolicyError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(PolicyError::InvalidArgument(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    Ok(())
}

fn check_proportion(p: f64, name: &str) -> Result<(), PolicyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PolicyError::InvalidArgument(format!(
            "{name} must be in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Sample size needed to estimate a proportion to within half-width
/// `margin` at the given confidence level, using the normal approximation:
/// `n0 = ceil(z^2 p(1-p) / margin^2)`, reduced by the finite-population
/// correction `n = ceil(n0 / (1 + (n0-1)/N))` and capped at `N` when a
/// population size is given. Degenerate guesses (`p_guess` of 0 or 1) clamp
/// to 1.
pub fn required_sample_size(
    margin: f64,
    confidence: f64,
    population: Option<u64>,
    p_guess: f64,
) -> Result<u64, PolicyError> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(PolicyError::InvalidArgument(format!(
            "margin must be in (0, 1), got {margin}"
        )));
    }
    check_confidence(confidence)?;
    check_proportion(p_guess, "p_guess")?;
    if population == Some(0) {
        return Err(PolicyError::InvalidArgument("population must be >= 1".into()));
    }

    let z = normal_quantile((1.0 + confidence) / 2.0);
    let n0 = (z * z * p_guess * (1.0 - p_guess) / (margin * margin)).ceil();
    let n0 = if n0 < 1.0 { 1.0 } else { n0 };
    match population {
        None => Ok(n0 as u64),
        Some(pop) => {
            let n = (n0 / (1.0 + (n0 - 1.0) / pop as f64)).ceil() as u64;
            Ok(n.min(pop))
        }
    }
}

/// Half-width of the normal-approximation confidence interval for a
/// proportion observed on `n` samples: `z * sqrt(p(1-p)/n)`, shrunk by
/// `sqrt((N-n)/(N-1))` when drawn without replacement from a finite
/// population of size `N`. A census (`n = N`) has zero margin.
pub fn proportion_margin(
    n: u64,
    confidence: f64,
    population: Option<u64>,
    p_hat: f64,
) -> Result<f64, PolicyError> {
    if n == 0 {
        return Err(PolicyError::InvalidArgument("n must be >= 1".into()));
    }
    check_confidence(confidence)?;
    check_proportion(p_hat, "p_hat")?;

    let z = normal_quantile((1.0 + confidence) / 2.0);
    let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    match population {
        None => Ok(z * se),
        Some(pop) => {
            if n > pop {
                return Err(PolicyError::InvalidArgument(format!(
                    "sample size {n} exceeds population {pop}"
                )));
            }
            if n == pop {
                return Ok(0.0);
            }
            let fpc = ((pop - n) as f64 / (pop - 1) as f64).sqrt();
            Ok(z * se * fpc)
        }
    }
}

/// Standard-normal quantile via Acklam's rational approximation (relative
/// error below 1.2e-9 over (0, 1)), so no statistical tables are needed at
/// runtime.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must be in (0, 1), got {p}");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}
