//! Command-line front end: experiment runs, skew traces, sample-size
//! statistics, synthetic data generation, and curve re-aggregation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use alsvm::al_engine::{run_al, skew_series};
use alsvm::cost_policy::{proportion_margin, required_sample_size, CostPolicy};
use alsvm::dataset::{class_counts, write_svmlight};
use alsvm::harness::{
    curve_table, load_bundle, load_dataset, run_experiment, write_bundle, ArmSpec,
    ExperimentSpec,
};
use alsvm::harness::{generate_two_gaussians, SynthParams};
use alsvm::ALConfig;

#[derive(Parser)]
#[command(name = "alsvm", version, about = "Cost-weighted SVM active learning for imbalanced data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-arm experiment described by a JSON spec file
    Run {
        /// Path to the experiment spec (JSON)
        #[arg(long)]
        spec: PathBuf,
        /// Override every arm's batch size
        #[arg(long)]
        batch_size: Option<usize>,
        /// Override every arm's initial labeled-sample size
        #[arg(long)]
        seed_size: Option<usize>,
        /// Replace the spec's arms with a single arm using this policy
        /// (`initpa | currentpa | fixed:<v> | balanced | oversample`)
        #[arg(long)]
        policy: Option<CostPolicy>,
        /// Override every arm's maximum number of selection rounds
        #[arg(long)]
        rounds: Option<usize>,
        /// Override every arm's rng seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one active-learning config and emit its per-round labeled
    /// positive fraction as CSV
    Skew {
        /// Pool dataset in SVM-light format (labels act as the oracle)
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "currentpa")]
        policy: CostPolicy,
        #[arg(long, default_value_t = 20)]
        batch_size: usize,
        #[arg(long, default_value_t = 100)]
        seed_size: usize,
        /// Maximum selection rounds (default: run to pool exhaustion)
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample size required to estimate a proportion within a sampling
    /// error, and the margin that size achieves
    Samplesize {
        /// Target half-width of the confidence interval, in (0, 1)
        #[arg(long)]
        margin: f64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Finite population size (omit for the infinite-population formula)
        #[arg(long)]
        population: Option<u64>,
        /// Assumed proportion (0.5 is the conservative worst case)
        #[arg(long, default_value_t = 0.5)]
        p_guess: f64,
    },
    /// Generate a synthetic two-Gaussian dataset in SVM-light format
    Gen {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        pos_fraction: f64,
        /// Distance between the class centers
        #[arg(long, default_value_t = 2.0)]
        separation: f64,
        /// Standard deviation of the positive class
        #[arg(long, default_value_t = 1.0)]
        pos_std: f64,
        /// Standard deviation of the negative class
        #[arg(long, default_value_t = 1.0)]
        neg_std: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-aggregate curves.csv from existing `<dir>/<arm>/fold<N>/trace.json`
    Curves {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn sanitize_arm_name(policy: &CostPolicy) -> String {
    policy
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

fn cmd_run(
    spec_path: PathBuf,
    batch_size: Option<usize>,
    seed_size: Option<usize>,
    policy: Option<CostPolicy>,
    rounds: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let text = fs::read_to_string(&spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", spec_path.display()))?;

    if let Some(policy) = policy {
        spec.arms = vec![ArmSpec {
            name: sanitize_arm_name(&policy),
            config: ALConfig {
                sampling_policy: policy,
                ..ALConfig::default()
            },
        }];
    }
    for arm in &mut spec.arms {
        if let Some(b) = batch_size {
            arm.config.batch_size = b;
        }
        if let Some(s) = seed_size {
            arm.config.seed_size = s;
        }
        if let Some(r) = rounds {
            arm.config.max_rounds = Some(r);
        }
        if let Some(s) = seed {
            arm.config.rng_seed = s;
        }
    }
    if let Some(out) = out {
        spec.out = out;
    }

    let bundle = run_experiment(&spec)?;
    let warnings = write_bundle(&bundle)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let folds = bundle.arms.first().map_or(0, |a| a.folds.len());
    println!(
        "wrote {} ({} arm(s) x {} fold(s))",
        spec.out.display(),
        bundle.arms.len(),
        folds
    );
    Ok(())
}

fn cmd_skew(
    data: PathBuf,
    policy: CostPolicy,
    batch_size: usize,
    seed_size: usize,
    rounds: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let pool = load_dataset(&data)?;
    let config = ALConfig {
        batch_size,
        seed_size,
        max_rounds: rounds,
        sampling_policy: policy,
        rng_seed: seed,
        ..ALConfig::default()
    };
    let trace = run_al(&pool, &config, None)?;

    let mut csv = String::from("round,labeled_pos_fraction\n");
    for (round, fraction) in skew_series(&trace) {
        csv.push_str(&format!("{round},{fraction}\n"));
    }
    match out {
        Some(path) => {
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_samplesize(
    margin: f64,
    confidence: f64,
    population: Option<u64>,
    p_guess: f64,
) -> Result<()> {
    let n = required_sample_size(margin, confidence, population, p_guess)?;
    let achieved = proportion_margin(n, confidence, population, p_guess)?;
    println!("n = {n}");
    println!("achieved margin = {achieved}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    n: usize,
    dim: usize,
    pos_fraction: f64,
    separation: f64,
    pos_std: f64,
    neg_std: f64,
    seed: u64,
    out: PathBuf,
) -> Result<()> {
    let data = generate_two_gaussians(&SynthParams {
        n,
        dim,
        pos_fraction,
        separation,
        pos_std,
        neg_std,
        rng_seed: seed,
    })?;
    fs::write(&out, write_svmlight(&data))
        .with_context(|| format!("writing {}", out.display()))?;
    let (pos, neg) = class_counts(&data);
    println!("wrote {} ({pos} pos / {neg} neg, dim {dim})", out.display());
    Ok(())
}

fn cmd_curves(dir: PathBuf) -> Result<()> {
    let arms = load_bundle(&dir)?;
    let table = curve_table(&arms)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let path = dir.join("curves.csv");
    fs::write(&path, &table.csv).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            spec,
            batch_size,
            seed_size,
            policy,
            rounds,
            seed,
            out,
        } => cmd_run(spec, batch_size, seed_size, policy, rounds, seed, out),
        Command::Skew {
            data,
            policy,
            batch_size,
            seed_size,
            rounds,
            seed,
            out,
        } => cmd_skew(data, policy, batch_size, seed_size, rounds, seed, out),
        Command::Samplesize {
            margin,
            confidence,
            population,
            p_guess,
        } => cmd_samplesize(margin, confidence, population, p_guess),
        Command::Gen {
            n,
            dim,
            pos_fraction,
            separation,
            pos_std,
            neg_std,
            seed,
            out,
        } => cmd_gen(n, dim, pos_fraction, separation, pos_std, neg_std, seed, out),
        Command::Curves { dir } => cmd_curves(dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
