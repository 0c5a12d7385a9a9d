//! Scoring free-text predictions.

use thiserror::Error;

mod cider;
mod harness;
mod levenshtein;
mod metrics;
mod snap;

pub use cider::{cider_d, spider, tokenize, CiderScores, SpiderScores, DEFAULT_MAX_N, DEFAULT_SIGMA, SPICE_SCALE};
pub use harness::{evaluate, read_spice, EvalOptions};
pub use levenshtein::{bounded_levenshtein, levenshtein, levenshtein_chars, BitPattern};
pub use metrics::{
    accuracy, clap_detect, detection_f1, index_predictions, per_label_csv, Diagnostics, LabelScore, MetricReport,
};
pub use snap::{parse_detections, similarity, snap_label, LabelSet, ParsedDetections, DEFAULT_OVERLAP_THRESHOLD};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("labels {first:?} and {second:?} normalize to the same form")]
    DuplicateLabel { first: String, second: String },
    #[error("{} instance(s) without a prediction, first {:?}", .0.len(), .0.first())]
    MissingPrediction(Vec<String>),
    #[error("{} prediction(s) for unknown instances, first {:?}", .0.len(), .0.first())]
    UnknownInstance(Vec<String>),
    #[error("duplicate prediction for {0}")]
    DuplicatePrediction(String),
    #[error("duplicate instance ids in the reference set")]
    DuplicateInstance,
    #[error("prediction and reference chunks differ: {0:?}")]
    ChunkMismatch(Vec<String>),
    #[error("label {0:?} is not in the task's label universe")]
    UnknownLabel(String),
    #[error("no items to score for {0}")]
    EmptyInput(&'static str),
    #[error("item {0} has no references")]
    NoReferences(usize),
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("invalid score: {0}")]
    InvalidScore(String),
    #[error("dimension mismatch: audio {audio}, label {label}, template {template}")]
    DimensionMismatch { audio: usize, label: usize, template: usize },
    #[error("zero-length embedding")]
    ZeroVector,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
