//! The TOML run configuration. Every key is optional and defaults to the
//! library default; unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//! jobs = 4
//! strict = true
//! tasks = ["classification", "detection"]
//!
//! [generate]
//! n_options = 4
//! detection_none_rate = 0.5
//! task_n_options = { classification = 6 }
//!
//! [window]
//! win_s = 10.0
//! hop_s = 5.0
//!
//! [pcen]
//! smoothing = 0.025
//!
//! [gate]
//! threshold = { median_mad = 1.5 }
//! ```

use std::path::Path;

use bioprep_core::audiodsp::{GateConfig, PcenParams, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, DEFAULT_WIN_S, STEM_THRESHOLD};
use bioprep_core::eval::DEFAULT_OVERLAP_THRESHOLD;
use bioprep_core::promptgen::GenConfig;
use bioprep_core::Task;
use serde::{Deserialize, Serialize};

use crate::usage;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed. `generate.seed` is always replaced by this value.
    pub seed: u64,
    pub jobs: usize,
    pub strict: bool,
    /// Task families for `generate`; empty means all.
    pub tasks: Vec<Task>,
    pub generate: GenConfig,
    pub window: WindowConfig,
    pub pcen: PcenParams,
    pub gate: GateConfig,
    pub augment: AugmentConfig,
    pub holdout: HoldoutConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub win_s: f64,
    pub hop_s: f64,
    pub min_count: usize,
    pub min_overlap_s: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            win_s: DEFAULT_WIN_S,
            hop_s: DEFAULT_HOP_S,
            min_count: DEFAULT_MIN_COUNT,
            min_overlap_s: 0.0,
        }
    }
}

/// Stem selection and the energy spectrogram fed to the PCEN gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    pub stem_threshold: f64,
    pub frame_len: usize,
    pub hop: usize,
    pub n_bands: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            stem_threshold: STEM_THRESHOLD,
            frame_len: 1024,
            hop: 512,
            n_bands: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HoldoutConfig {
    pub n_species: usize,
    pub min_genus_recordings: usize,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        Self {
            n_species: 300,
            min_genus_recordings: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub overlap_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
        }
    }
}

impl RunConfig {
    /// Reads and parses a config file. Any failure is a usage error.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
