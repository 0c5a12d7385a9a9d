//! On-disk data model: clips, events, generated instances and predictions.
//!
//! Everything is UTF-8 JSONL, one object per line, with snake_case keys in
//! declaration order. Floats use the shortest round-trip representation, so
//! a validated manifest written back by [`write_jsonl`] is byte-identical.

mod holdout;
mod io;
mod stats;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use holdout::{holdout_unseen_species, HeldSpecies, HoldoutSplit};
pub use io::{
    check_manifest, parse_jsonl, read_instances, read_manifest, read_predictions, to_jsonl,
    write_jsonl, KeyMode, ManifestCheck,
};
pub use stats::{clip_stats, instance_stats, round_hours, ClipStats, DatasetStats, InstanceStats, StatsReport, TaskStats};
pub use validate::{validate_clip, validate_clips, validate_instance};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: unknown key {key:?} (strict mode)")]
    UnknownKey { line: u64, key: String },
    #[error("{id}: invalid {field}: {message}")]
    InvariantViolation {
        id: String,
        field: String,
        message: String,
    },
    #[error("not enough eligible species: requested {requested}, eligible {eligible}")]
    NotEnoughEligible { requested: usize, eligible: usize },
}

impl ManifestError {
    pub(crate) fn invariant(id: &str, field: &str, message: impl Into<String>) -> Self {
        ManifestError::InvariantViolation {
            id: id.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ManifestError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub onset_s: f64,
    pub offset_s: f64,
    pub label: String,
}

impl Event {
    pub fn new(onset_s: f64, offset_s: f64, label: impl Into<String>) -> Self {
        Self {
            onset_s,
            offset_s,
            label: label.into(),
        }
    }
}

/// One audio recording's metadata.
///
/// `attrs` carries optional per-task fields: `lifestage`, `vocalization_kind`,
/// `n_speakers`, `n_individuals`, `n_instruments`, `instruments`, `pitch_hz`,
/// `instrument`, `velocity`, `qualities`, and additional captions under keys
/// starting with `llm_caption`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub clip_id: String,
    pub audio_uri: String,
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub dataset: String,
    pub license: String,
    #[serde(default)]
    pub focal_taxon: Option<String>,
    #[serde(default)]
    pub all_taxa: Vec<String>,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default)]
    pub caption: Option<String>,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
    /// Unknown keys kept in permissive mode.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl ClipRecord {
    pub fn new(clip_id: impl Into<String>, dataset: impl Into<String>, duration_s: f64) -> Self {
        let clip_id = clip_id.into();
        Self {
            audio_uri: format!("{clip_id}.wav"),
            clip_id,
            sample_rate_hz: 16_000,
            duration_s,
            dataset: dataset.into(),
            license: "cc-by".into(),
            focal_taxon: None,
            all_taxa: Vec::new(),
            events: Vec::new(),
            caption: None,
            attrs: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Focal taxon followed by the remaining `all_taxa`, deduplicated.
    pub fn taxa(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.focal_taxon.iter().map(String::as_str).collect();
        for t in &self.all_taxa {
            if !out.contains(&t.as_str()) {
                out.push(t);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Detection,
    Captioning,
    Calltype,
    Lifestage,
    Count,
    Pitch,
    Instrument,
    Velocity,
    Quality,
    MixtureCount,
    MixtureNames,
}

impl Task {
    pub const ALL: [Task; 12] = [
        Task::Classification,
        Task::Detection,
        Task::Captioning,
        Task::Calltype,
        Task::Lifestage,
        Task::Count,
        Task::Pitch,
        Task::Instrument,
        Task::Velocity,
        Task::Quality,
        Task::MixtureCount,
        Task::MixtureNames,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Detection => "detection",
            Task::Captioning => "captioning",
            Task::Calltype => "calltype",
            Task::Lifestage => "lifestage",
            Task::Count => "count",
            Task::Pitch => "pitch",
            Task::Instrument => "instrument",
            Task::Velocity => "velocity",
            Task::Quality => "quality",
            Task::MixtureCount => "mixture_count",
            Task::MixtureNames => "mixture_names",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.as_str() == s.trim())
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Stage1,
    Stage2,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
        }
    }

    /// Stage 1 is perception pretraining on classification only; stage 2
    /// admits every task family.
    pub fn admits(self, task: Task) -> bool {
        match self {
            Stage::Stage1 => task == Task::Classification,
            Stage::Stage2 => true,
        }
    }
}

pub const NONE_TARGET: &str = "None";

/// Separator for multi-label targets.
pub const LABEL_JOIN: &str = ", ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub instance_id: String,
    pub clip_id: String,
    pub window: Option<(f64, f64)>,
    pub task: Task,
    pub stage: Stage,
    pub instruction: String,
    pub target: String,
    pub options: Option<Vec<String>>,
    pub meta: BTreeMap<String, String>,
}

impl Instance {
    /// Labels named by the target: empty for `None`, otherwise the
    /// `", "`-joined parts.
    pub fn target_labels(&self) -> Vec<&str> {
        split_target(&self.target)
    }
}

pub fn split_target(target: &str) -> Vec<&str> {
    if target == NONE_TARGET || target.is_empty() {
        Vec::new()
    } else {
        target.split(LABEL_JOIN).collect()
    }
}

/// `<dataset>/<clip_id>/<task>/<counter>`, counter zero-padded to 4 digits.
pub fn instance_id(dataset: &str, clip_id: &str, task: Task, counter: usize) -> String {
    format!("{dataset}/{clip_id}/{}/{counter:04}", task.as_str())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub text: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_id_scheme() {
        assert_eq!(instance_id("xc", "c1", Task::Detection, 7), "xc/c1/detection/0007");
    }

    #[test]
    fn stage_filter() {
        assert!(Stage::Stage1.admits(Task::Classification));
        assert!(!Stage::Stage1.admits(Task::Detection));
        assert!(Task::ALL.iter().all(|t| Stage::Stage2.admits(*t)));
    }

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            assert_eq!(Task::parse(t.as_str()), Some(t));
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.as_str()));
        }
    }

    #[test]
    fn taxa_dedup() {
        let mut c = ClipRecord::new("c", "d", 1.0);
        c.focal_taxon = Some("a".into());
        c.all_taxa = vec!["b".into(), "a".into()];
        assert_eq!(c.taxa(), ["a", "b"]);
    }
}
