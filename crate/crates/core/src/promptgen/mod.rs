//! Instruction instance generation for every task family.
//!
//! Every generator is a pure function of (record, config, seed): each
//! instance draws from its own RNG stream derived from the run seed and the
//! instance's coordinates, so output does not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{Stage, Task};

mod options;
mod run;
mod tasks;
pub mod templates;

pub use run::{generate, GenOutput};
pub use tasks::{
    gen_calltype, gen_caption, gen_classification, gen_count, gen_detection, gen_lifestage,
    gen_mixture_names, gen_music, quality_description, CountKind, DetectionSubject, MusicOutput,
    CALLTYPE_LABELS, LIFESTAGE_LABELS,
};
pub use templates::{render, RenderCtx, Template, TemplateRegistry};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("template registry: {0}")]
    Templates(String),
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("duplicate instance id {0}")]
    DuplicateInstance(String),
}

/// Why a clip produced no instance for a task. Skips are counted and
/// reported, never fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub clip_id: String,
    pub task: Task,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    NoTaxa,
    UnknownTaxon(String),
    MissingAttr(&'static str),
    BadValue { key: &'static str, value: String },
    NoCaption,
}

impl SkipReason {
    /// Stable short name used when aggregating counts.
    pub fn kind(&self) -> &'static str {
        match self {
            SkipReason::NoTaxa => "no_taxa",
            SkipReason::UnknownTaxon(_) => "unknown_taxon",
            SkipReason::MissingAttr(_) => "missing_attr",
            SkipReason::BadValue { .. } => "bad_value",
            SkipReason::NoCaption => "no_caption",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::NoTaxa => f.write_str("no taxa"),
            SkipReason::UnknownTaxon(t) => write!(f, "unknown taxon {t:?}"),
            SkipReason::MissingAttr(k) => write!(f, "missing attrs.{k}"),
            SkipReason::BadValue { key, value } => write!(f, "attrs.{key} = {value:?} not usable"),
            SkipReason::NoCaption => f.write_str("no caption"),
        }
    }
}

impl fmt::Display for Skip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.clip_id, self.task, self.reason)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKindMode {
    Common,
    #[default]
    Scientific,
    /// Per-instance fair coin between common and scientific.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardLevelWeights {
    pub genus: f64,
    pub family: f64,
    pub order: f64,
}

impl Default for HardLevelWeights {
    fn default() -> Self {
        Self {
            genus: 1.0,
            family: 1.0,
            order: 1.0,
        }
    }
}

impl HardLevelWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.genus, self.family, self.order]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub name_kind: NameKindMode,
    /// Options per prompt, answer included.
    pub n_options: usize,
    /// Per-task override of `n_options`.
    pub task_n_options: BTreeMap<Task, usize>,
    /// Probability that a distractor is a hard (taxonomically close) negative.
    pub negative_mix: f64,
    pub hard_level_weights: HardLevelWeights,
    pub detection_none_rate: f64,
    pub stage: Stage,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            name_kind: NameKindMode::default(),
            n_options: 5,
            task_n_options: BTreeMap::new(),
            negative_mix: 0.5,
            hard_level_weights: HardLevelWeights::default(),
            detection_none_rate: 0.5,
            stage: Stage::Stage2,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn options_for(&self, task: Task) -> usize {
        self.task_n_options.get(&task).copied().unwrap_or(self.n_options)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(GenError::Config(format!("{name} = {p} is outside [0, 1]")))
            }
        };
        prob("negative_mix", self.negative_mix)?;
        prob("detection_none_rate", self.detection_none_rate)?;
        if self.n_options < 2 {
            return Err(GenError::Config(format!("n_options = {} must be >= 2", self.n_options)));
        }
        if let Some((task, n)) = self.task_n_options.iter().find(|(_, &n)| n < 2) {
            return Err(GenError::Config(format!("n_options for {task} = {n} must be >= 2")));
        }
        let w = self.hard_level_weights.as_array();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(GenError::Config(format!("hard_level_weights must be finite and >= 0, got {w:?}")));
        }
        if self.negative_mix > 0.0 && w.iter().sum::<f64>() <= 0.0 {
            return Err(GenError::Config("hard_level_weights sum to zero but negative_mix > 0".into()));
        }
        Ok(())
    }
}
