//! Multi-arm experiment runner: holdout or stratified k-fold protocols, one
//! active-learning trace per arm × fold, learning-curve aggregation, and
//! deterministic CSV/JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::al_engine::{run_al, ALConfig, ALTrace};
use crate::dataset::{parse_svmlight_reader, Dataset};
use crate::harness::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// One run per arm on the full training pool, evaluated on the separate
    /// test set when given.
    Holdout,
    /// Stratified k-fold cross-validation over the training file; each fold
    /// is the test set for a run on the remaining folds. Ignores `test`.
    Kfold { k: usize },
}

/// A named active-learning configuration to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub name: String,
    #[serde(default)]
    pub config: ALConfig,
}

/// A full experiment: datasets, protocol, the arms to compare, and where
/// results go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub train: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    pub arms: Vec<ArmSpec>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// When true (the default), fold `j` runs with the arm's `rng_seed + j`,
    /// drawing a fresh initial labeled sample per fold; when false every
    /// fold shares the arm's seed.
    #[serde(default = "default_true")]
    pub reseed_per_fold: bool,
}

fn default_protocol() -> Protocol {
    Protocol::Holdout
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

/// All traces of one arm, in fold order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub name: String,
    pub folds: Vec<ALTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentBundle {
    pub spec: ExperimentSpec,
    pub arms: Vec<ArmResult>,
}

/// The aggregated learning-curve CSV plus any alignment warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub csv: String,
    pub warnings: Vec<String>,
}

fn validate_spec(spec: &ExperimentSpec) -> Result<(), HarnessError> {
    if spec.arms.is_empty() {
        return Err(HarnessError::Invalid("at least one arm is required".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for arm in &spec.arms {
        if arm.name.is_empty()
            || !arm
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(HarnessError::Invalid(format!(
                "arm name {:?} must be non-empty and use only [A-Za-z0-9_-]",
                arm.name
            )));
        }
        if !seen.insert(&arm.name) {
            return Err(HarnessError::Invalid(format!(
                "duplicate arm name {:?}",
                arm.name
            )));
        }
    }
    if let Protocol::Kfold { k } = spec.protocol {
        if k < 2 {
            return Err(HarnessError::Invalid(format!("kfold needs k >= 2, got {k}")));
        }
    }
    Ok(())
}

/// Stratified fold assignment: class index lists are shuffled separately and
/// dealt round-robin, so per-fold class counts differ by at most one.
/// Returns the test-index set of each fold, ascending within a fold.
pub fn stratified_kfold(
    data: &Dataset,
    k: usize,
    rng_seed: u64,
) -> Result<Vec<Vec<usize>>, HarnessError> {
    if k < 2 || k > data.len() {
        return Err(HarnessError::Invalid(format!(
            "kfold needs 2 <= k <= {}, got {k}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pos: Vec<usize> = Vec::new();
    let mut neg: Vec<usize> = Vec::new();
    for (i, e) in data.examples().iter().enumerate() {
        if e.label.is_positive() {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &id) in pos.iter().enumerate() {
        folds[i % k].push(id);
    }
    for (i, &id) in neg.iter().enumerate() {
        folds[i % k].push(id);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, HarnessError> {
    let file = fs::File::open(path).map_err(|e| HarnessError::from(e).at(path))?;
    parse_svmlight_reader(std::io::BufReader::new(file))
        .map_err(|e| HarnessError::from(e).at(path))
}

/// Loads the spec's datasets and runs it. See [`run_experiment_on`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentBundle, HarnessError> {
    let train = load_dataset(&spec.train)?;
    let test = spec.test.as_deref().map(load_dataset).transpose()?;
    run_experiment_on(spec, &train, test.as_ref())
}

/// Runs every arm over every fold of the protocol. Arm × fold runs are
/// independent and execute in parallel; results are collected in spec order,
/// so the bundle (and everything written from it) is deterministic given
/// the spec.
pub fn run_experiment_on(
    spec: &ExperimentSpec,
    train: &Dataset,
    test: Option<&Dataset>,
) -> Result<ExperimentBundle, HarnessError> {
    validate_spec(spec)?;

    let folds: Vec<(Dataset, Option<Dataset>)> = match spec.protocol {
        Protocol::Holdout => vec![(train.clone(), test.cloned())],
        Protocol::Kfold { k } => stratified_kfold(train, k, spec.rng_seed)?
            .into_iter()
            .map(|test_ids| {
                let in_test: std::collections::HashSet<usize> = test_ids.iter().copied().collect();
                let train_ids: Vec<usize> =
                    (0..train.len()).filter(|i| !in_test.contains(i)).collect();
                (train.subset(&train_ids), Some(train.subset(&test_ids)))
            })
            .collect(),
    };

    let jobs: Vec<(usize, usize)> = (0..spec.arms.len())
        .flat_map(|a| (0..folds.len()).map(move |f| (a, f)))
        .collect();

    let traces: Vec<ALTrace> = jobs
        .par_iter()
        .map(|&(a, f)| {
            let arm = &spec.arms[a];
            let mut config = arm.config.clone();
            if spec.reseed_per_fold {
                config.rng_seed = arm.config.rng_seed.wrapping_add(f as u64);
            }
            let (pool, fold_test) = &folds[f];
            run_al(pool, &config, fold_test.as_ref()).map_err(|e| {
                HarnessError::Invalid(format!("arm {:?} fold {f}: {e}", arm.name))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut arms = Vec::with_capacity(spec.arms.len());
    for (a, arm) in spec.arms.iter().enumerate() {
        arms.push(ArmResult {
            name: arm.name.clone(),
            folds: (0..folds.len())
                .map(|f| traces[a * folds.len() + f].clone())
                .collect(),
        });
    }

    Ok(ExperimentBundle {
        spec: spec.clone(),
        arms,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates per-arm learning curves: one row per round index evaluated
/// in every arm and fold, as `labeled_size` followed by each arm's mean F1
/// and sample standard deviation across folds. Rounds beyond the shortest
/// trace or lacking metrics in some fold (evaluation strides) are skipped
/// with a warning.
pub fn curve_table(arms: &[ArmResult]) -> Result<CurveTable, HarnessError> {
    if arms.is_empty() || arms.iter().any(|a| a.folds.is_empty()) {
        return Err(HarnessError::Invalid(
            "curve aggregation needs at least one arm with at least one trace".into(),
        ));
    }

    let mut warnings = Vec::new();

    let all_traces: Vec<&ALTrace> = arms.iter().flat_map(|a| a.folds.iter()).collect();
    let min_rounds = all_traces.iter().map(|t| t.rounds.len()).min().unwrap_or(0);
    let max_rounds = all_traces.iter().map(|t| t.rounds.len()).max().unwrap_or(0);
    let common: Vec<usize> = (0..min_rounds)
        .filter(|&r| all_traces.iter().all(|t| t.rounds[r].metrics.is_some()))
        .collect();
    if common.len() < max_rounds {
        warnings.push(format!(
            "curves cover {} of {max_rounds} round(s); rounds missing metrics in any arm or fold are skipped",
            common.len()
        ));
    }

    let mut header = String::from("labeled_size");
    for arm in arms {
        header.push_str(&format!(",{0}_f1_mean,{0}_f1_std", arm.name));
    }

    let mut csv = header;
    csv.push('\n');

    let reference = &arms[0].folds[0];
    let mut size_warned = false;
    for &r in &common {
        let labeled_size = reference.labeled_size(r);
        for trace in &all_traces {
            if trace.labeled_size(r) != labeled_size && !size_warned {
                warnings.push(format!(
                    "labeled sizes disagree at round {r}; using arm {:?}'s sizes",
                    arms[0].name
                ));
                size_warned = true;
            }
        }

        csv.push_str(&labeled_size.to_string());
        for arm in arms {
            let f1s: Vec<f64> = arm
                .folds
                .iter()
                .map(|t| t.rounds[r].metrics.as_ref().expect("metrics present on common rounds").f1)
                .collect();
            let (mean, std) = mean_std(&f1s);
            csv.push_str(&format!(",{mean},{std}"));
        }
        csv.push('\n');
    }

    Ok(CurveTable { csv, warnings })
}

#[derive(Serialize)]
struct ResolvedSeeds<'a> {
    arm: &'a str,
    fold_seeds: Vec<u64>,
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'static str,
    curve_metric: &'static str,
    curve_metric_note: &'static str,
    folds: usize,
    resolved_seeds: Vec<ResolvedSeeds<'a>>,
    spec: &'a ExperimentSpec,
}

/// Writes `<out>/<arm>/fold<j>/{trace.json,trace.csv,model.txt}`, the
/// aggregated `<out>/curves.csv`, and `<out>/meta.json`. Returns the curve
/// warnings. Output bytes depend only on the bundle.
pub fn write_bundle(bundle: &ExperimentBundle) -> Result<Vec<String>, HarnessError> {
    let out = &bundle.spec.out;
    fs::create_dir_all(out)?;

    for arm in &bundle.arms {
        for (j, trace) in arm.folds.iter().enumerate() {
            let dir = out.join(&arm.name).join(format!("fold{j}"));
            fs::create_dir_all(&dir)?;
            let mut json = serde_json::to_string_pretty(trace)?;
            json.push('\n');
            fs::write(dir.join("trace.json"), json)?;
            fs::write(dir.join("trace.csv"), trace.to_csv())?;
            let mut model = Vec::new();
            trace.final_model.write_text(&mut model)?;
            fs::write(dir.join("model.txt"), model)?;
        }
    }

    let table = curve_table(&bundle.arms)?;
    fs::write(out.join("curves.csv"), &table.csv)?;

    let n_folds = bundle.arms.first().map_or(0, |a| a.folds.len());
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        curve_metric: "f1",
        curve_metric_note:
            "curves report the F1 of the positive class; precision and recall are in each trace.csv",
        folds: n_folds,
        resolved_seeds: bundle
            .spec
            .arms
            .iter()
            .map(|arm| ResolvedSeeds {
                arm: &arm.name,
                fold_seeds: (0..n_folds)
                    .map(|f| {
                        if bundle.spec.reseed_per_fold {
                            arm.config.rng_seed.wrapping_add(f as u64)
                        } else {
                            arm.config.rng_seed
                        }
                    })
                    .collect(),
            })
            .collect(),
        spec: &bundle.spec,
    };
    let mut meta_json = serde_json::to_string_pretty(&meta)?;
    meta_json.push('\n');
    fs::write(out.join("meta.json"), meta_json)?;

    Ok(table.warnings)
}

/// Reads `<dir>/<arm>/fold<j>/trace.json` back into arm results, arms
/// sorted by name and folds by index.
pub fn load_bundle(dir: &Path) -> Result<Vec<ArmResult>, HarnessError> {
    let mut arm_dirs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    arm_dirs.sort();

    let mut arms = Vec::new();
    for arm_dir in arm_dirs {
        let name = arm_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        let mut fold_ids: Vec<(usize, PathBuf)> = fs::read_dir(&arm_dir)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter_map(|p| {
                let idx: usize = p
                    .file_name()?
                    .to_str()?
                    .strip_prefix("fold")?
                    .parse()
                    .ok()?;
                p.join("trace.json").exists().then_some((idx, p))
            })
            .collect();
        fold_ids.sort();
        if fold_ids.is_empty() {
            continue;
        }
        let mut folds = Vec::new();
        for (_, fold_dir) in fold_ids {
            let path = fold_dir.join("trace.json");
            let text = fs::read_to_string(&path).map_err(|e| HarnessError::from(e).at(&path))?;
            let trace: ALTrace =
                serde_json::from_str(&text).map_err(|e| HarnessError::from(e).at(&path))?;
            folds.push(trace);
        }
        arms.push(ArmResult { name, folds });
    }
    if arms.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "no <arm>/fold<N>/trace.json files found under {}",
            dir.display()
        )));
    }
    Ok(arms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::al_engine::RoundRecord;
    use crate::cost_policy::CostPolicy;
    use crate::dataset::{class_counts, Label, LabeledExample, SparseVector};
    use crate::harness::metrics::EvalMetrics;
    use crate::harness::synth::{generate_two_gaussians, SynthParams};
    use crate::svm::LinearModel;

    fn fake_trace(f1s: &[f64], seed_size: usize, batch: usize) -> ALTrace {
        let rounds = f1s
            .iter()
            .enumerate()
            .map(|(r, &f1)| {
                let total = seed_size + r * batch;
                RoundRecord {
                    round: r,
                    pa_sampling: 2.0,
                    pa_prediction: 2.0,
                    n_pos_labeled: total / 4,
                    n_neg_labeled: total - total / 4,
                    selected: Vec::new(),
                    labeled_pos_fraction: 0.25,
                    metrics: Some(EvalMetrics {
                        true_pos: 1,
                        false_pos: 1,
                        false_neg: 1,
                        true_neg: 1,
                        precision: 0.5,
                        recall: 0.5,
                        f1,
                    }),
                    pa_fallback: false,
                }
            })
            .collect();
        ALTrace {
            config: ALConfig::default(),
            seed_ids: Vec::new(),
            cost_neg_used: 1.0,
            rounds,
            final_model: LinearModel::from_hyperplane(vec![1.0], 0.0),
            round_models: None,
        }
    }

    #[test]
    fn curve_table_shapes() {
        let arms = vec![
            ArmResult {
                name: "a".into(),
                folds: vec![fake_trace(&[0.1, 0.2, 0.3], 10, 5)],
            },
            ArmResult {
                name: "b".into(),
                folds: vec![fake_trace(&[0.2, 0.3, 0.4], 10, 5)],
            },
        ];
        let table = curve_table(&arms).unwrap();
        let lines: Vec<&str> = table.csv.lines().collect();
        assert_eq!(lines.len(), 4); // header + 3 rounds
        assert_eq!(lines[0], "labeled_size,a_f1_mean,a_f1_std,b_f1_mean,b_f1_std");
        assert_eq!(lines[1].split(',').count(), 5);
        assert!(table.warnings.is_empty());

        let one = curve_table(&arms[..1]).unwrap();
        assert_eq!(one.csv.lines().next().unwrap().split(',').count(), 3);
    }

    #[test]
    fn curve_table_truncates_to_common_prefix() {
        let arms = vec![
            ArmResult {
                name: "short".into(),
                folds: vec![fake_trace(&[0.1, 0.2], 10, 5)],
            },
            ArmResult {
                name: "long".into(),
                folds: vec![fake_trace(&[0.1, 0.2, 0.3, 0.4], 10, 5)],
            },
        ];
        let table = curve_table(&arms).unwrap();
        assert_eq!(table.csv.lines().count(), 3); // header + 2 common rounds
        assert_eq!(table.warnings.len(), 1);
        assert!(table.warnings[0].contains("2 of 4"), "{:?}", table.warnings);
    }

    #[test]
    fn curve_table_skips_rounds_without_metrics() {
        // An evaluation stride leaves holes; only mutually evaluated rounds
        // become rows.
        let mut strided = fake_trace(&[0.1, 0.2, 0.3, 0.4], 10, 5);
        strided.rounds[1].metrics = None;
        strided.rounds[3].metrics = None;
        let arms = vec![
            ArmResult {
                name: "strided".into(),
                folds: vec![strided],
            },
            ArmResult {
                name: "full".into(),
                folds: vec![fake_trace(&[0.5, 0.6, 0.7, 0.8], 10, 5)],
            },
        ];
        let table = curve_table(&arms).unwrap();
        let lines: Vec<&str> = table.csv.lines().collect();
        assert_eq!(lines.len(), 3); // header + rounds 0 and 2
        assert!(lines[1].starts_with("10,"));
        assert!(lines[2].starts_with("20,"));
        assert_eq!(table.warnings.len(), 1);
    }

    #[test]
    fn aggregation_of_identical_folds_is_exact() {
        let trace = fake_trace(&[0.25, 0.5], 10, 5);
        let arms = vec![ArmResult {
            name: "same".into(),
            folds: vec![trace.clone(), trace.clone(), trace],
        }];
        let table = curve_table(&arms).unwrap();
        let rows: Vec<&str> = table.csv.lines().skip(1).collect();
        assert_eq!(rows[0], "10,0.25,0");
        assert_eq!(rows[1], "15,0.5,0");
    }

    #[test]
    fn curve_table_rejects_empty_input() {
        assert!(curve_table(&[]).is_err());
        let empty_arm = ArmResult {
            name: "x".into(),
            folds: Vec::new(),
        };
        assert!(curve_table(&[empty_arm]).is_err());
    }

    #[test]
    fn mean_std_of_known_values() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
        let (m, s) = mean_std(&[5.0]);
        assert_eq!((m, s), (5.0, 0.0));
    }

    fn tiny_pool(n: usize, pos_fraction: f64, seed: u64) -> Dataset {
        generate_two_gaussians(&SynthParams {
            n,
            dim: 2,
            pos_fraction,
            separation: 2.5,
            rng_seed: seed,
            ..SynthParams::default()
        })
        .unwrap()
    }

    #[test]
    fn stratified_folds_partition_and_balance() {
        let data = tiny_pool(103, 0.3, 5);
        let (total_pos, _) = class_counts(&data);
        let folds = stratified_kfold(&data, 4, 9).unwrap();

        let mut seen = vec![false; data.len()];
        let mut pos_counts = Vec::new();
        for fold in &folds {
            let mut pos = 0;
            for &i in fold {
                assert!(!seen[i], "index {i} appears in two folds");
                seen[i] = true;
                if data.examples()[i].label.is_positive() {
                    pos += 1;
                }
            }
            pos_counts.push(pos);
        }
        assert!(seen.iter().all(|&s| s), "every example must land in a fold");
        assert_eq!(pos_counts.iter().sum::<usize>(), total_pos);
        let (lo, hi) = (
            pos_counts.iter().min().unwrap(),
            pos_counts.iter().max().unwrap(),
        );
        assert!(hi - lo <= 1, "stratification should balance within 1: {pos_counts:?}");
    }

    #[test]
    fn kfold_argument_checks() {
        let data = tiny_pool(10, 0.5, 0);
        assert!(stratified_kfold(&data, 1, 0).is_err());
        assert!(stratified_kfold(&data, 11, 0).is_err());
    }

    fn smoke_spec(out: PathBuf) -> ExperimentSpec {
        let arm = |name: &str, policy: CostPolicy| ArmSpec {
            name: name.into(),
            config: ALConfig {
                seed_size: 30,
                batch_size: 20,
                sampling_policy: policy,
                rng_seed: 1,
                ..ALConfig::default()
            },
        };
        ExperimentSpec {
            train: PathBuf::from("unused"),
            test: None,
            protocol: Protocol::Holdout,
            arms: vec![
                arm("initpa", CostPolicy::init_pa()),
                arm("currentpa", CostPolicy::current_pa()),
                arm("fixed4", CostPolicy::fixed_pa(4.0).unwrap()),
                arm("balanced", CostPolicy::balanced()),
                arm("oversample", CostPolicy::oversample_duplicate()),
            ],
            rng_seed: 7,
            out,
            reseed_per_fold: true,
        }
    }

    #[test]
    fn five_policy_smoke_run_emits_well_formed_outputs() {
        let started = std::time::Instant::now();
        let pool = tiny_pool(210, 0.15, 11);
        let test = tiny_pool(120, 0.15, 12);

        let dir = tempfile::tempdir().unwrap();
        let spec = smoke_spec(dir.path().join("out"));
        let bundle = run_experiment_on(&spec, &pool, Some(&test)).unwrap();
        let warnings = write_bundle(&bundle).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");

        // Pool exhaustion: every arm labels everything.
        for arm in &bundle.arms {
            let last = arm.folds[0].rounds.last().unwrap();
            assert_eq!(last.n_pos_labeled + last.n_neg_labeled, pool.len());
        }

        let curves = std::fs::read_to_string(spec.out.join("curves.csv")).unwrap();
        let lines: Vec<&str> = curves.lines().collect();
        assert_eq!(lines[0].split(',').count(), 1 + 2 * 5);
        assert_eq!(lines.len(), 1 + bundle.arms[0].folds[0].rounds.len());

        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(spec.out.join("meta.json")).unwrap())
                .unwrap();
        assert_eq!(meta["curve_metric"], "f1");

        for arm in &bundle.arms {
            let fold_dir = spec.out.join(&arm.name).join("fold0");
            let trace: ALTrace = serde_json::from_str(
                &std::fs::read_to_string(fold_dir.join("trace.json")).unwrap(),
            )
            .unwrap();
            assert_eq!(&trace, &arm.folds[0]);
            assert!(fold_dir.join("trace.csv").exists());
            assert!(fold_dir.join("model.txt").exists());
        }

        assert!(
            started.elapsed().as_secs() < 60,
            "smoke run took {:?}",
            started.elapsed()
        );
    }

    #[test]
    fn reruns_are_byte_identical() {
        let pool = tiny_pool(140, 0.2, 21);
        let test = tiny_pool(80, 0.2, 22);

        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut spec = smoke_spec(dir_a.path().join("out"));
        spec.arms.truncate(2);
        spec.arms[0].config.max_rounds = Some(3);
        spec.arms[1].config.max_rounds = Some(3);

        let bundle_a = run_experiment_on(&spec, &pool, Some(&test)).unwrap();
        write_bundle(&bundle_a).unwrap();

        let mut spec_b = spec.clone();
        spec_b.out = dir_b.path().join("out");
        let bundle_b = run_experiment_on(&spec_b, &pool, Some(&test)).unwrap();
        write_bundle(&bundle_b).unwrap();

        let a = std::fs::read(spec.out.join("curves.csv")).unwrap();
        let b = std::fs::read(spec_b.out.join("curves.csv")).unwrap();
        assert_eq!(a, b);

        let a = std::fs::read(spec.out.join("initpa/fold0/trace.json")).unwrap();
        let b = std::fs::read(spec_b.out.join("initpa/fold0/trace.json")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kfold_runs_produce_one_trace_per_fold_and_reload() {
        let pool = tiny_pool(120, 0.25, 31);
        let dir = tempfile::tempdir().unwrap();
        let mut spec = smoke_spec(dir.path().join("out"));
        spec.arms.truncate(2);
        spec.protocol = Protocol::Kfold { k: 3 };
        for arm in &mut spec.arms {
            arm.config.seed_size = 20;
            arm.config.batch_size = 10;
            arm.config.max_rounds = Some(2);
        }

        let bundle = run_experiment_on(&spec, &pool, None).unwrap();
        assert_eq!(bundle.arms.len(), 2);
        for arm in &bundle.arms {
            assert_eq!(arm.folds.len(), 3);
            for trace in &arm.folds {
                assert!(trace.rounds.iter().all(|r| r.metrics.is_some()));
            }
        }

        write_bundle(&bundle).unwrap();
        let reloaded = load_bundle(&spec.out).unwrap();
        assert_eq!(reloaded.len(), 2);
        let by_name: std::collections::BTreeMap<_, _> =
            reloaded.iter().map(|a| (a.name.clone(), a)).collect();
        for arm in &bundle.arms {
            assert_eq!(by_name[&arm.name].folds, arm.folds);
        }
    }

    #[test]
    fn experiment_spec_json_roundtrip() {
        let json = r#"{
            "train": "pool.svml",
            "test": "test.svml",
            "protocol": {"kfold": {"k": 10}},
            "rng_seed": 3,
            "out": "results",
            "arms": [
                {"name": "initpa", "config": {"sampling_policy": {"kind": "init_pa"}}},
                {"name": "fixed", "config": {"sampling_policy": {"kind": {"fixed_pa": 4.0}}, "batch_size": 10}}
            ]
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.protocol, Protocol::Kfold { k: 10 });
        assert_eq!(spec.arms.len(), 2);
        assert_eq!(spec.arms[1].config.batch_size, 10);
        assert!(spec.reseed_per_fold);
        // Defaults fill the rest.
        assert_eq!(spec.arms[0].config.seed_size, 100);

        let back: ExperimentSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn fake_example_constructor_sanity() {
        // Keep the fixture honest: labels and features must be well-formed.
        let e = LabeledExample::new(
            SparseVector::new(vec![(1, 1.0)]).unwrap(),
            Label::Positive,
        );
        assert!(e.label.is_positive());
    }
}
