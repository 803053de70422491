//! Sparse datasets, SVM-light text ingestion/emission, class counts, and
//! reproducible splits.
//!
//! Feature indices are 1-based (SVM-light convention); index 0 is reserved
//! and illegal in files. Values are `f64` and are emitted with the shortest
//! decimal representation that round-trips, so `parse ∘ write` is the
//! identity on any valid dataset.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_err(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Format {
        line,
        message: message.into(),
    }
}

/// Binary class label, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// `+1.0` for positive, `-1.0` for negative.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

/// Feature vector stored as `(index, value)` pairs, strictly ascending by
/// index. Indices start at 1; entries with value exactly 0 are never stored
/// (zeros are implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs. Indices must be ≥ 1 and
    /// strictly ascending; zero-valued entries are dropped.
    pub fn new(entries: Vec<(u32, f64)>) -> Result<Self, DatasetError> {
        let mut prev = 0u32;
        for &(idx, _) in &entries {
            if idx == 0 {
                return Err(DatasetError::InvalidArgument(
                    "feature index 0 is reserved; indices start at 1".into(),
                ));
            }
            if idx <= prev {
                return Err(DatasetError::InvalidArgument(format!(
                    "feature indices must be strictly ascending: {idx} follows {prev}"
                )));
            }
            prev = idx;
        }
        Ok(SparseVector {
            entries: entries.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    pub fn empty() -> Self {
        SparseVector {
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Largest stored index, or 0 for the empty vector.
    pub fn max_index(&self) -> u32 {
        self.entries.last().map_or(0, |&(i, _)| i)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        let (mut a, mut b) = (self.entries.iter(), other.entries.iter());
        let (mut x, mut y) = (a.next(), b.next());
        while let (Some(&(i, u)), Some(&(j, v))) = (x, y) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => x = a.next(),
                std::cmp::Ordering::Greater => y = b.next(),
                std::cmp::Ordering::Equal => {
                    sum += u * v;
                    x = a.next();
                    y = b.next();
                }
            }
        }
        sum
    }

    /// Dot product against a dense weight vector where `weights[i]` holds the
    /// weight of feature index `i + 1`. Indices beyond the slice contribute 0.
    pub fn dot_dense(&self, weights: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter(|&&(i, _)| (i as usize) <= weights.len())
            .map(|&(i, v)| weights[i as usize - 1] * v)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }
}

/// A feature vector with its `±1` label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: SparseVector,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(features: SparseVector, label: Label) -> Self {
        LabeledExample { features, label }
    }
}

/// An ordered collection of labeled examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    dimension: u32,
}

impl Dataset {
    /// Dimension is the maximum feature index over all examples.
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        let dimension = examples
            .iter()
            .map(|e| e.features.max_index())
            .max()
            .unwrap_or(0);
        Dataset {
            examples,
            dimension,
        }
    }

    /// Like [`Dataset::new`] but with an explicit dimension, which must cover
    /// every stored index.
    pub fn with_dimension(examples: Vec<LabeledExample>, dimension: u32) -> Result<Self, DatasetError> {
        let natural = examples
            .iter()
            .map(|e| e.features.max_index())
            .max()
            .unwrap_or(0);
        if dimension < natural {
            return Err(DatasetError::InvalidArgument(format!(
                "dimension {dimension} is below the largest feature index {natural}"
            )));
        }
        Ok(Dataset {
            examples,
            dimension,
        })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Dataset made of the examples at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::new(
            indices
                .iter()
                .map(|&i| self.examples[i].clone())
                .collect(),
        )
    }
}

/// Counts `(n_pos, n_neg)` over a slice of examples.
pub fn class_counts_of(examples: &[LabeledExample]) -> (usize, usize) {
    let n_pos = examples.iter().filter(|e| e.label.is_positive()).count();
    (n_pos, examples.len() - n_pos)
}

/// Counts `(n_pos, n_neg)` over a dataset.
pub fn class_counts(data: &Dataset) -> (usize, usize) {
    class_counts_of(data.examples())
}

/// Parses SVM-light text: one `<label> <index>:<value> ...` example per
/// line, `#`-prefixed comment lines and blank lines skipped. Labels may be
/// written `+1`, `1`, or `-1`; indices must be ≥ 1 and strictly ascending
/// within a line.
pub fn parse_svmlight(text: &str) -> Result<Dataset, DatasetError> {
    parse_svmlight_reader(text.as_bytes())
}

/// Reader-based variant of [`parse_svmlight`]. Line numbers in errors count
/// every line, including comments and blanks.
pub fn parse_svmlight_reader(reader: impl BufRead) -> Result<Dataset, DatasetError> {
    let mut examples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        let mut tokens = line.split_whitespace();
        let label_str = tokens.next().expect("non-empty line has a first token");
        let label = match label_str {
            "+1" | "1" => Label::Positive,
            "-1" => Label::Negative,
            other => {
                return Err(format_err(
                    line_no,
                    format!("label must be +1, 1, or -1, got {other:?}"),
                ))
            }
        };

        let mut entries = Vec::new();
        let mut prev_index = 0u32;
        for token in tokens {
            let (idx_str, val_str) = token.split_once(':').ok_or_else(|| {
                format_err(line_no, format!("expected index:value, got {token:?}"))
            })?;
            let index: u32 = idx_str.parse().map_err(|_| {
                format_err(line_no, format!("invalid feature index {idx_str:?}"))
            })?;
            if index == 0 {
                return Err(format_err(line_no, "feature index 0 is reserved"));
            }
            if index <= prev_index {
                return Err(format_err(
                    line_no,
                    format!("non-ascending feature index: {index} follows {prev_index}"),
                ));
            }
            let value: f64 = val_str.parse().map_err(|_| {
                format_err(line_no, format!("invalid feature value {val_str:?}"))
            })?;
            if !value.is_finite() {
                return Err(format_err(
                    line_no,
                    format!("feature value must be finite, got {val_str:?}"),
                ));
            }
            prev_index = index;
            if value != 0.0 {
                entries.push((index, value));
            }
        }

        examples.push(LabeledExample::new(
            SparseVector { entries },
            label,
        ));
    }
    Ok(Dataset::new(examples))
}

/// Emits SVM-light text; inverse of [`parse_svmlight`].
pub fn write_svmlight(data: &Dataset) -> String {
    let mut out = String::new();
    for ex in data.examples() {
        out.push_str(match ex.label {
            Label::Positive => "+1",
            Label::Negative => "-1",
        });
        for (idx, val) in ex.features.iter() {
            // `{}` on f64 prints the shortest decimal that round-trips.
            write!(out, " {idx}:{val}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Index-level version of [`split_initial`]: partitions `0..n` into a seed
/// part of `seed_size` indices drawn uniformly without replacement and the
/// rest. Both parts keep ascending order. Deterministic given `rng_seed`.
pub fn split_initial_indices(
    n: usize,
    seed_size: usize,
    rng_seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if seed_size == 0 || seed_size > n {
        return Err(DatasetError::InvalidArgument(format!(
            "seed_size must be in 1..={n}, got {seed_size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let mut seed: Vec<usize> = indices[..seed_size].to_vec();
    let mut pool: Vec<usize> = indices[seed_size..].to_vec();
    seed.sort_unstable();
    pool.sort_unstable();
    Ok((seed, pool))
}

/// Splits off a uniform random (not stratified) initial labeled set of
/// `seed_size` examples; the remainder becomes the unlabeled pool. The two
/// parts are disjoint, cover the input exactly, and preserve the input
/// order. Deterministic given `rng_seed`.
pub fn split_initial(
    data: &Dataset,
    seed_size: usize,
    rng_seed: u64,
) -> Result<(Dataset, Dataset), DatasetError> {
    let (seed_idx, pool_idx) = split_initial_indices(data.len(), seed_size, rng_seed)?;
    Ok((data.subset(&seed_idx), data.subset(&pool_idx)))
}
