//! Command-line entry point.
//!
//! Every command reads the optional config document, applies flag
//! overrides, validates, and either prints the resolved document
//! (`--dry-run`) or runs and echoes it as `config.toml` into `--out`.
//! Exit codes: 0 success, 1 runtime error, 2 config error.

mod config;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fusion::{default_cycaug, Augmentation};
use crate::io::{load_any, save_any};
use crate::metrics::{
    diversity_report, hardness, pooled_pearson, strength_hardness_curve, write_curve_csv as write_hardness_csv,
};
use crate::rng::RngState;
use crate::toyrl::train::write_curve_csv as write_train_csv;
use crate::toyrl::{evaluate, train, TinyPolicy, TrainConfig, TrainRun};
use crate::transforms::{presample_param_sets, Diversity, PaddingMode, TransformKind, TransformSpec};

pub use config::{
    AugmentConfig, CompareConfig, EvalConfig, ExperimentConfig, SweepDiversityConfig, SweepHardnessConfig,
};
pub use report::{compare_runs, CompareTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Stream of the `augment` command.
const AUGMENT_STREAM: u64 = 0;
/// Stream used to pre-sample finite-diversity parameter sets.
const PRESAMPLE_STREAM: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "rlaug", version, about = "Deterministic image augmentation for visual RL")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config document (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for per-seed loops.
    #[arg(long, global = true)]
    pub parallel_seeds: Option<usize>,
    /// Print the resolved config and exit without writing anything.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment an ARLT or PNG batch.
    Augment(AugmentArgs),
    /// Hardness of one operator across strengths on trained policies.
    SweepHardness(SweepHardnessArgs),
    /// Diversity accounting (and optional hardness) across spatial diversities.
    SweepDiversity(SweepDiversityArgs),
    /// Train toy policies, one per seed.
    Train(TrainArgs),
    /// Evaluate a saved policy, optionally on augmented observations.
    Eval(EvalArgs),
    /// Tabulate per-method IQM returns of train output directories.
    Compare(CompareArgs),
}

/// Flags that build a single-operator transform.
#[derive(Debug, Args, Default)]
pub struct OpArgs {
    #[arg(long, value_parser = parse_kind)]
    pub op: Option<TransformKind>,
    /// Sets both strength bounds.
    #[arg(long, conflicts_with_all = ["strength_min", "strength_max"])]
    pub strength: Option<u32>,
    #[arg(long)]
    pub strength_min: Option<u32>,
    #[arg(long)]
    pub strength_max: Option<u32>,
    #[arg(long, value_parser = parse_diversity)]
    pub diversity: Option<Diversity>,
    #[arg(long, value_parser = parse_padding)]
    pub padding_mode: Option<PaddingMode>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub op: OpArgs,
}

#[derive(Debug, Args)]
pub struct SweepHardnessArgs {
    #[arg(long, value_parser = parse_kind)]
    pub op: Option<TransformKind>,
    /// Comma-separated strengths.
    #[arg(long, value_delimiter = ',')]
    pub strengths: Option<Vec<u32>>,
    #[arg(long, value_parser = parse_diversity)]
    pub diversity: Option<Diversity>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Policy file; repeat once per seed, or give one for all seeds.
    #[arg(long)]
    pub policy: Vec<PathBuf>,
    /// Train augmentation-free policies first.
    #[arg(long)]
    pub train_baseline: bool,
    #[arg(long)]
    pub episodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepDiversityArgs {
    #[arg(long, value_parser = parse_kind)]
    pub op: Option<TransformKind>,
    #[arg(long)]
    pub strength: Option<u32>,
    /// Comma-separated diversities (positive integers or `unlimited`).
    #[arg(long, value_delimiter = ',', value_parser = parse_diversity)]
    pub diversities: Option<Vec<Diversity>>,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Preset: none, pad_crop, rand_pr, or cycaug.
    #[arg(long, value_parser = parse_preset)]
    pub augmentation: Option<Augmentation>,
    #[arg(long)]
    pub total_env_steps: Option<u64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Comma-separated evaluation seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[command(flatten)]
    pub op: OpArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Train output directories, one per method.
    pub runs: Vec<PathBuf>,
}

fn parse_kind(s: &str) -> std::result::Result<TransformKind, String> {
    TransformKind::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = TransformKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown operator {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_diversity(s: &str) -> std::result::Result<Diversity, String> {
    match s {
        "unlimited" => Ok(Diversity::Unlimited),
        _ => match s.parse::<u32>() {
            Ok(d) if d > 0 => Ok(Diversity::Finite(d)),
            _ => Err(format!("expected a positive integer or `unlimited`, got {s:?}")),
        },
    }
}

fn parse_padding(s: &str) -> std::result::Result<PaddingMode, String> {
    match s {
        "replicate" => Ok(PaddingMode::Replicate),
        "zero" => Ok(PaddingMode::Zero),
        _ => Err(format!("expected `replicate` or `zero`, got {s:?}")),
    }
}

/// Named augmentations used in comparisons.
pub fn preset(name: &str) -> Option<Augmentation> {
    Some(match name {
        "none" => Augmentation::None,
        "pad_crop" => Augmentation::Op(TransformSpec::pad_crop(4)),
        "rand_pr" => Augmentation::Op(TransformSpec::rand_pad_resize(0, 16)),
        "cycaug" => Augmentation::Schedule(default_cycaug(500)),
        _ => return None,
    })
}

fn parse_preset(s: &str) -> std::result::Result<Augmentation, String> {
    preset(s).ok_or_else(|| format!("unknown preset {s:?}; expected none, pad_crop, rand_pr, or cycaug"))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Loads the config, applies the flags, and validates.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let g = &cli.global;
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(n) = g.parallel_seeds {
        config.parallel_seeds = n;
    }
    match &cli.command {
        Command::Augment(a) => {
            if let Some(input) = &a.input {
                config.augment.input = Some(input.clone());
            }
            if let Some(spec) = a.op.spec("augment.augmentation")? {
                config.augment.augmentation = Augmentation::Op(spec);
            }
        }
        Command::SweepHardness(a) => {
            let s = &mut config.sweep_hardness;
            if let Some(op) = a.op {
                s.op = op;
            }
            if let Some(strengths) = &a.strengths {
                s.strengths = strengths.clone();
            }
            if let Some(d) = a.diversity {
                s.diversity = d;
            }
            if !a.policy.is_empty() {
                s.policies = a.policy.clone();
            }
            if a.train_baseline {
                s.train_baseline = true;
            }
            if let Some(n) = a.episodes {
                s.episodes = n;
            }
            if let Some(seeds) = &a.seeds {
                config.seeds = Some(seeds.clone());
            }
        }
        Command::SweepDiversity(a) => {
            let s = &mut config.sweep_diversity;
            if let Some(op) = a.op {
                s.op = op;
            }
            if let Some(strength) = a.strength {
                s.strength = strength;
            }
            if let Some(d) = &a.diversities {
                s.diversities = d.clone();
            }
            if let Some(p) = &a.policy {
                s.policy = Some(p.clone());
            }
            if let Some(n) = a.episodes {
                s.episodes = n;
            }
        }
        Command::Train(a) => {
            if let Some(aug) = &a.augmentation {
                config.train.augmentation = aug.clone();
            }
            if let Some(n) = a.total_env_steps {
                config.train.total_env_steps = n;
            }
            if let Some(seeds) = &a.seeds {
                config.seeds = Some(seeds.clone());
            }
        }
        Command::Eval(a) => {
            if let Some(p) = &a.policy {
                config.eval.policy = Some(p.clone());
            }
            if let Some(n) = a.episodes {
                config.eval.episodes = n;
            }
            if let Some(seeds) = &a.seeds {
                config.seeds = Some(seeds.clone());
            }
            if let Some(spec) = a.op.spec("eval.transform")? {
                config.eval.transform = Augmentation::Op(spec);
            }
        }
        Command::Compare(a) => {
            if !a.runs.is_empty() {
                config.compare.runs = a.runs.clone();
            }
        }
    }
    config.train.seed = config.seed;
    config.validate()?;
    Ok(config)
}

impl OpArgs {
    fn spec(&self, key: &str) -> Result<Option<TransformSpec>> {
        let Some(op) = self.op else {
            if self.strength.is_some() || self.strength_min.is_some() || self.strength_max.is_some() {
                return Err(Error::Config {
                    key: key.into(),
                    message: "strength flags need --op".into(),
                });
            }
            return Ok(None);
        };
        let (lo, hi) = match (self.strength, self.strength_min, self.strength_max) {
            (Some(s), _, _) => (s, s),
            (None, lo, hi) => (lo.unwrap_or(0), hi.or(lo).unwrap_or(0)),
        };
        let mut spec = TransformSpec::new(op, lo, hi);
        if let Some(d) = self.diversity {
            spec = spec.with_diversity(d);
        }
        if let Some(mode) = self.padding_mode {
            spec = spec.with_padding(mode);
        }
        spec.validate().map_err(|e| Error::Config {
            key: key.into(),
            message: e.to_string(),
        })?;
        Ok(Some(spec))
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = resolve(&cli)?;
    if cli.global.dry_run {
        print!("{}", config.to_toml());
        return Ok(());
    }
    let out = cli.global.out.clone().ok_or_else(|| Error::Config {
        key: "--out".into(),
        message: "an output directory is required".into(),
    })?;
    create_dir(&out)?;
    write_file(&out.join("config.toml"), config.to_toml().as_bytes())?;
    match cli.command {
        Command::Augment(_) => cmd_augment(&config, &out),
        Command::SweepHardness(_) => cmd_sweep_hardness(&config, &out),
        Command::SweepDiversity(_) => cmd_sweep_diversity(&config, &out),
        Command::Train(_) => cmd_train(&config, &out).map(|_| ()),
        Command::Eval(_) => cmd_eval(&config, &out),
        Command::Compare(_) => cmd_compare(&config, &out),
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs `f` for every seed on up to `workers` threads; results keep seed order.
pub fn for_each_seed<T, F>(seeds: &[u64], workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new(seeds.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, seeds.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = seeds.get(i) else {
                    break;
                };
                let result = f(seed);
                slots.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every seed ran"))
        .collect()
}

/// Pre-samples finite-diversity parameter sets that are not stored yet.
fn presampled(aug: &Augmentation, seed: u64) -> Result<Augmentation> {
    match aug {
        Augmentation::Op(spec) if matches!(spec.diversity, Diversity::Finite(_)) && spec.param_sets.is_none() => Ok(
            Augmentation::Op(presample_param_sets(spec, &RngState::new(seed, PRESAMPLE_STREAM))?),
        ),
        other => Ok(other.clone()),
    }
}

fn load_policy(path: &Path) -> Result<TinyPolicy> {
    if !path.exists() {
        return Err(Error::InvalidValue(format!(
            "policy {} not found; train one with `rlaug train --out DIR` (it writes DIR/seed_<s>/policy.json) \
             or pass --train-baseline",
            path.display()
        )));
    }
    TinyPolicy::load(path)
}

pub fn cmd_augment(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let input = config.augment.input.as_ref().ok_or_else(|| Error::Config {
        key: "augment.input".into(),
        message: "an input batch (ARLT or PNG) is required".into(),
    })?;
    let batch = load_any(input)?;
    let aug = presampled(&config.augment.augmentation, config.seed)?;
    let result = aug.apply(&batch, &RngState::new(config.seed, AUGMENT_STREAM))?;
    let name = input
        .file_name()
        .ok_or_else(|| Error::InvalidValue(format!("input path {} has no file name", input.display())))?;
    save_any(&result, out.join(name))
}

/// Trains one policy per seed into `out/seed_<s>/` and writes the joint
/// curve to `out/curve.csv`.
pub fn cmd_train(config: &ExperimentConfig, out: &Path) -> Result<Vec<TrainRun>> {
    let seeds = config.seed_list();
    let runs = for_each_seed(&seeds, config.parallel_seeds, |seed| {
        let run_config = TrainConfig {
            seed,
            ..config.train.clone()
        };
        let trained = train(&run_config)?;
        let dir = out.join(format!("seed_{seed}"));
        create_dir(&dir)?;
        trained.policy.save(&dir.join("policy.json"))?;
        write_file(&dir.join("curve.csv"), &train_csv(&[&trained.run])?)?;
        let summary = serde_json::to_vec_pretty(&trained.run).map_err(|e| Error::Format(e.to_string()))?;
        write_file(&dir.join("run.json"), &summary)?;
        Ok(trained.run)
    })?;
    let refs: Vec<&TrainRun> = runs.iter().collect();
    write_file(&out.join("curve.csv"), &train_csv(&refs)?)?;
    Ok(runs)
}

fn train_csv(runs: &[&TrainRun]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_train_csv(&mut buf, runs).map_err(|e| Error::io("curve.csv", e))?;
    Ok(buf)
}

pub fn cmd_eval(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let path = config.eval.policy.as_ref().ok_or_else(|| Error::Config {
        key: "eval.policy".into(),
        message: "a policy file is required".into(),
    })?;
    let policy = load_policy(path)?;
    let seeds = config.seed_list();
    let samples = for_each_seed(&seeds, config.parallel_seeds, |seed| {
        let transform = presampled(&config.eval.transform, seed)?;
        evaluate(&policy, &config.train.env, config.eval.episodes, Some(&transform), seed)
    })?;
    let mut returns = csv::Writer::from_writer(Vec::new());
    let mut summary = csv::Writer::from_writer(Vec::new());
    returns.write_record(["seed", "episode", "return"]).map_err(csv_err)?;
    summary
        .write_record(["seed", "n_episodes", "return_mean", "return_iqm"])
        .map_err(csv_err)?;
    for (seed, sample) in seeds.iter().zip(&samples) {
        for (k, r) in sample.episode_returns.iter().enumerate() {
            returns
                .write_record([seed.to_string(), k.to_string(), r.to_string()])
                .map_err(csv_err)?;
        }
        summary
            .write_record([
                seed.to_string(),
                sample.len().to_string(),
                sample.mean().to_string(),
                sample.iqm().to_string(),
            ])
            .map_err(csv_err)?;
    }
    write_file(&out.join("returns.csv"), &returns.into_inner().map_err(|e| csv_err(e.into_error().into()))?)?;
    write_file(&out.join("summary.csv"), &summary.into_inner().map_err(|e| csv_err(e.into_error().into()))?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Policies for the hardness sweep, one per seed.
fn sweep_policies(config: &ExperimentConfig, out: &Path) -> Result<Vec<TinyPolicy>> {
    let s = &config.sweep_hardness;
    let seeds = config.seed_list();
    if s.train_baseline {
        let baseline = ExperimentConfig {
            train: TrainConfig {
                augmentation: Augmentation::None,
                ..config.train.clone()
            },
            ..config.clone()
        };
        let dir = out.join("baseline");
        create_dir(&dir)?;
        cmd_train(&baseline, &dir)?;
        return seeds
            .iter()
            .map(|seed| TinyPolicy::load(&dir.join(format!("seed_{seed}")).join("policy.json")))
            .collect();
    }
    match s.policies.len() {
        0 => Err(Error::InvalidValue(
            "no policy given: pass --policy PATH (from `rlaug train`) or --train-baseline".into(),
        )),
        1 => {
            let policy = load_policy(&s.policies[0])?;
            Ok(vec![policy; seeds.len()])
        }
        n if n == seeds.len() => s.policies.iter().map(|p| load_policy(p)).collect(),
        n => Err(Error::Config {
            key: "sweep_hardness.policies".into(),
            message: format!("{n} policies for {} seeds; give one or one per seed", seeds.len()),
        }),
    }
}

pub fn cmd_sweep_hardness(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let s = &config.sweep_hardness;
    let seeds = config.seed_list();
    let policies = sweep_policies(config, out)?;
    let jobs: Vec<u64> = (0..seeds.len() as u64).collect();
    let curves = for_each_seed(&jobs, config.parallel_seeds, |i| {
        let (seed, policy) = (seeds[i as usize], &policies[i as usize]);
        strength_hardness_curve(
            |spec| {
                let transform = match spec {
                    Some(spec) => Some(presampled(&Augmentation::Op(spec.clone().with_diversity(s.diversity)), seed)?),
                    None => None,
                };
                evaluate(policy, &config.train.env, s.episodes, transform.as_ref(), seed)
            },
            s.op,
            &s.strengths,
        )
    })?;
    let pooled = if s.strengths.len() >= 3 { pooled_pearson(&curves).ok() } else { None };
    let blocks: Vec<(u64, _)> = seeds.iter().copied().zip(curves).collect();
    let mut buf = Vec::new();
    write_hardness_csv(&mut buf, &blocks, pooled).map_err(|e| Error::io("hardness.csv", e))?;
    write_file(&out.join("hardness.csv"), &buf)
}

pub const DIVERSITY_CSV_HEADER: &str =
    "op,strength,spatial_diversity,strength_diversity,type_diversity,clean_mean,aug_mean,hardness_ratio";

pub fn cmd_sweep_diversity(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let s = &config.sweep_diversity;
    let policy = s.policy.as_deref().map(load_policy).transpose()?;
    let clean = match &policy {
        Some(p) => Some(evaluate(p, &config.train.env, s.episodes, None, config.seed)?),
        None => None,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DIVERSITY_CSV_HEADER.split(',')).map_err(csv_err)?;
    for &d in &s.diversities {
        let spec = TransformSpec::new(s.op, s.strength, s.strength).with_diversity(d);
        let aug = presampled(&Augmentation::Op(spec.clone()), config.seed)?;
        let report = diversity_report(&spec);
        let mut row = vec![
            s.op.name().to_string(),
            s.strength.to_string(),
            report.spatial_diversity.to_string(),
            report.strength_diversity.to_string(),
            report.type_diversity.to_string(),
        ];
        match (&policy, &clean) {
            (Some(p), Some(clean)) => {
                let augmented = evaluate(p, &config.train.env, s.episodes, Some(&aug), config.seed)?;
                let ratio = hardness(clean, &augmented).map_or_else(|_| "inf".to_string(), |h| h.ratio.to_string());
                row.extend([clean.mean().to_string(), augmented.mean().to_string(), ratio]);
            }
            _ => row.extend([String::new(), String::new(), String::new()]),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    write_file(&out.join("diversity.csv"), &w.into_inner().map_err(|e| csv_err(e.into_error().into()))?)
}

pub fn cmd_compare(config: &ExperimentConfig, out: &Path) -> Result<()> {
    if config.compare.runs.is_empty() {
        return Err(Error::Config {
            key: "compare.runs".into(),
            message: "give at least one train output directory".into(),
        });
    }
    let table = compare_runs(&config.compare.runs)?;
    write_file(&out.join("compare.csv"), table.to_csv()?.as_bytes())?;
    let text = table.to_text();
    write_file(&out.join("compare.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}
