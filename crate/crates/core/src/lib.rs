//! Bioacoustic instruction-tuning data construction and benchmark scoring.
//!
//! The crate is organized along the pipeline:
//!
//! * [`taxonomy`] joins heterogeneous species names onto one backbone and
//!   samples random or taxonomically close negatives.
//! * [`manifest`] holds the JSONL data model, validation and the
//!   unseen-species holdout split.
//! * [`promptgen`] turns clips and soundscape windows into instruction
//!   instances for every task family.
//! * [`audiodsp`] covers windowing, PCEN gating, stem scoring and mixing.
//! * [`eval`] scores free-text predictions: label snapping, accuracy,
//!   detection macro-F1, CIDEr-D and SPIDEr.

pub mod rng;
pub mod taxonomy;
pub mod audiodsp;
pub mod manifest;
pub mod promptgen;
pub mod eval;
pub mod synth;
pub mod text;

pub use audiodsp::{PcenParams, WindowRecord};
pub use eval::{EvalOptions, MetricReport};
pub use manifest::{ClipRecord, Event, Instance, PredictionRecord, Stage, Task};
pub use promptgen::{GenConfig, TemplateRegistry};
pub use taxonomy::{TaxonRecord, TaxonomyTable};
