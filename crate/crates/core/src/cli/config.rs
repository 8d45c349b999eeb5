//! The experiment config document shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::Augmentation;
use crate::toyrl::train::DEFAULT_EVAL_EPISODES;
use crate::toyrl::TrainConfig;
use crate::transforms::{Diversity, TransformKind};

/// Fully resolved configuration for one CLI invocation.
///
/// Sections belong to the subcommand of the same name; `train` also supplies
/// the environment for `eval` and the sweeps. The top-level `seed` and
/// `seeds` drive every per-seed loop, so `train.seed` is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    pub parallel_seeds: usize,
    pub train: TrainConfig,
    pub augment: AugmentConfig,
    pub eval: EvalConfig,
    pub sweep_hardness: SweepHardnessConfig,
    pub sweep_diversity: SweepDiversityConfig,
    pub compare: CompareConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: None,
            parallel_seeds: 1,
            train: TrainConfig::default(),
            augment: AugmentConfig::default(),
            eval: EvalConfig::default(),
            sweep_hardness: SweepHardnessConfig::default(),
            sweep_diversity: SweepDiversityConfig::default(),
            compare: CompareConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub augmentation: Augmentation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PathBuf>,
    pub episodes: usize,
    pub transform: Augmentation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            policy: None,
            episodes: DEFAULT_EVAL_EPISODES,
            transform: Augmentation::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepHardnessConfig {
    pub op: TransformKind,
    pub strengths: Vec<u32>,
    pub diversity: Diversity,
    pub episodes: usize,
    /// One policy shared by all seeds, or one per seed in `seeds` order.
    pub policies: Vec<PathBuf>,
    /// Train augmentation-free policies with the `train` section first.
    pub train_baseline: bool,
}

impl Default for SweepHardnessConfig {
    fn default() -> Self {
        Self {
            op: TransformKind::TranslateHd,
            strengths: vec![0, 2, 4, 8, 12],
            diversity: Diversity::Unlimited,
            episodes: DEFAULT_EVAL_EPISODES,
            policies: Vec::new(),
            train_baseline: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepDiversityConfig {
    pub op: TransformKind,
    pub strength: u32,
    pub diversities: Vec<Diversity>,
    pub episodes: usize,
    /// When set, each row also carries the hardness of the operator on it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PathBuf>,
}

impl Default for SweepDiversityConfig {
    fn default() -> Self {
        Self {
            op: TransformKind::TranslateHd,
            strength: 4,
            diversities: vec![
                Diversity::Finite(1),
                Diversity::Finite(2),
                Diversity::Finite(4),
                Diversity::Finite(8),
            ],
            episodes: DEFAULT_EVAL_EPISODES,
            policy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub runs: Vec<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config document, naming the offending key on failure.
    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config {
            key: e.span().map_or_else(|| "<document>".into(), |s| format!("byte {}", s.start)),
            message: e.message().to_string(),
        })?;
        if value
            .get("train")
            .and_then(|t| t.as_table())
            .is_some_and(|t| t.contains_key("seed"))
        {
            return Err(Error::Config {
                key: "train.seed".into(),
                message: "set the top-level `seed` or `seeds` instead".into(),
            });
        }
        serde_path_to_error::deserialize(toml::Value::Table(value)).map_err(|e| {
            let path = e.path().to_string();
            let message = e.into_inner().message().to_string();
            Error::Config {
                key: offending_key(&path, &message),
                message,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The document form; reloading it yields an equal config up to
    /// `train.seed`, which per-seed runs set themselves.
    pub fn to_toml(&self) -> String {
        let mut table = toml::Table::try_from(self).expect("config serializes to TOML");
        if let Some(toml::Value::Table(train)) = table.get_mut("train") {
            train.remove("seed");
        }
        toml::to_string(&table).expect("config serializes to TOML")
    }

    /// Seeds of every per-seed loop, in order.
    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![self.seed])
    }

    pub fn validate(&self) -> Result<()> {
        let config_err = |key: &str, message: &str| Error::Config {
            key: key.into(),
            message: message.into(),
        };
        if self.seeds.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(config_err("seeds", "must not be empty"));
        }
        if self.parallel_seeds == 0 {
            return Err(config_err("parallel_seeds", "must be at least 1"));
        }
        self.train.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::Config {
                key: format!("train.{key}"),
                message,
            },
            other => other,
        })?;
        self.augment
            .augmentation
            .validate()
            .map_err(|e| config_err("augment.augmentation", &e.to_string()))?;
        self.eval
            .transform
            .validate()
            .map_err(|e| config_err("eval.transform", &e.to_string()))?;
        if self.eval.episodes == 0 {
            return Err(config_err("eval.episodes", "must be positive"));
        }
        if self.sweep_hardness.strengths.is_empty() {
            return Err(config_err("sweep_hardness.strengths", "must not be empty"));
        }
        if self.sweep_hardness.episodes == 0 {
            return Err(config_err("sweep_hardness.episodes", "must be positive"));
        }
        if self.sweep_diversity.diversities.is_empty() {
            return Err(config_err("sweep_diversity.diversities", "must not be empty"));
        }
        if self.sweep_diversity.episodes == 0 {
            return Err(config_err("sweep_diversity.episodes", "must be positive"));
        }
        Ok(())
    }
}

/// The deserializer path, extended by the field name when an unknown field
/// sits inside a value that is parsed in a second pass.
fn offending_key(path: &str, message: &str) -> String {
    let unknown = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next());
    match (path, unknown) {
        ("." | "", Some(field)) => field.to_string(),
        ("." | "", None) => "<document>".into(),
        (p, Some(field)) if !p.ends_with(field) => format!("{p}.{field}"),
        (p, _) => p.to_string(),
    }
}
