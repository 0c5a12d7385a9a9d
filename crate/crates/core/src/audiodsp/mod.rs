//! Audio-side pipeline math.
//!
//! Source separation and frame-level AudioSet classification happen outside
//! this crate; their outputs arrive as stem bundles (see [`bundle`]).

mod activity;
pub mod bundle;
mod mixture;
mod pcen;
mod spectrogram;
mod stems;
pub mod wav;
mod window;

use thiserror::Error;

pub use activity::{detect_activity, frame_activity, gate_segments, median_mad_threshold, GateConfig, Threshold};
pub use mixture::{synth_mixture, Mixture, MAX_MIXTURE_SOURCES};
pub use pcen::{pcen, PcenParams, Spectrogram};
pub use spectrogram::energy_spectrogram;
pub use stems::{
    score_stem, score_stem_mapped, select_and_mix_stems, StemScore, Waveform, ANIMAL_CLASSES,
    STEM_THRESHOLD,
};
pub use window::{
    assign_window_labels, build_label_set, raw_window_labels, window_clip, window_manifest, LabelMap, WindowRecord,
    WindowSpec, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, DEFAULT_WIN_S, OTHER_LABEL,
};

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("probability out of [0, 1] at frame {frame}, column {column}: {value}")]
    InvalidProbability { frame: usize, column: usize, value: f64 },
    #[error("no stem scored above the selection threshold")]
    EmptyMix,
    #[error("waveforms differ in length or sample rate: {0}")]
    ShapeMismatch(String),
    #[error("at most {max} sources can be mixed, got {got}")]
    TooManySources { max: usize, got: usize },
    #[error("instrument name used twice: {0:?}")]
    NameCollision(String),
    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar error: {0}")]
    Sidecar(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DspError>;
