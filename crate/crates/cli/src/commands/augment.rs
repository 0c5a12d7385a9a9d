use std::path::{Path, PathBuf};

use anyhow::Context;
use bioprep_core::audiodsp::bundle::{read_bundle, score_bundle};
use bioprep_core::audiodsp::wav::write_wav;
use bioprep_core::audiodsp::{energy_spectrogram, gate_segments, select_and_mix_stems, DspError, STEM_THRESHOLD};
use bioprep_core::manifest::to_jsonl;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use super::write_file;
use crate::config::AugmentConfig;
use crate::{Explicit, RunConfig};

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Directory whose subdirectories are stem bundles (stem_<i>.wav, probs_<i>.bin, probs.json)
    #[arg(long, value_name = "DIR")]
    pub bundles: PathBuf,
    /// Augmented-clip manifest output (JSONL, one row per kept bundle)
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Directory for the mixed WAV files
    #[arg(long, value_name = "DIR")]
    pub audio_out: PathBuf,
    /// Stems need a score strictly above this to be mixed
    #[arg(long, default_value_t = STEM_THRESHOLD)]
    pub stem_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StemRow {
    pub stem_id: String,
    pub score: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedClip {
    pub clip_id: String,
    pub audio_uri: String,
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub stems: Vec<StemRow>,
    /// Active regions found by the PCEN gate, in seconds.
    pub segments: Vec<(f64, f64)>,
}

#[derive(Debug)]
enum Outcome {
    Kept(AugmentedClip),
    /// no stem above the threshold
    Empty(String),
    /// the gate found no activity in the mix
    Silent(String),
}

fn process(dir: &Path, name: &str, audio_out: &Path, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let AugmentConfig {
        stem_threshold,
        frame_len,
        hop,
        n_bands,
    } = cfg.augment;
    let stems = read_bundle(dir)?;
    let scored = score_bundle(&stems)?;
    let mix = match select_and_mix_stems(&scored, stem_threshold) {
        Err(DspError::EmptyMix) => return Ok(Outcome::Empty(name.to_string())),
        r => r?,
    };
    let energy = energy_spectrogram(&mix.samples, mix.sample_rate, frame_len, hop, n_bands)?;
    let segments = gate_segments(&energy, &cfg.pcen, &cfg.gate)?;
    if segments.is_empty() {
        return Ok(Outcome::Silent(name.to_string()));
    }
    let path = audio_out.join(format!("{name}.wav"));
    write_wav(&path, &mix)?;
    Ok(Outcome::Kept(AugmentedClip {
        clip_id: name.to_string(),
        audio_uri: path.display().to_string(),
        sample_rate_hz: mix.sample_rate,
        duration_s: mix.duration_s(),
        stems: scored
            .iter()
            .map(|(_, s)| StemRow {
                stem_id: s.stem_id.clone(),
                score: s.score,
                selected: s.score > stem_threshold,
            })
            .collect(),
        segments,
    }))
}

/// Bundles are processed in parallel; rows come out in bundle-name order.
pub fn run(args: &AugmentArgs, mut cfg: RunConfig, x: &Explicit) -> anyhow::Result<()> {
    if x.has("stem_threshold") {
        cfg.augment.stem_threshold = args.stem_threshold;
    }
    cfg.pcen.validate().map_err(|e| crate::usage(e.to_string()))?;
    let mut dirs: Vec<(String, PathBuf)> = std::fs::read_dir(&args.bundles)
        .with_context(|| format!("reading {}", args.bundles.display()))?
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.path()))
        .collect();
    dirs.sort();
    std::fs::create_dir_all(&args.audio_out).with_context(|| format!("creating {}", args.audio_out.display()))?;

    let outcomes: Vec<Outcome> = dirs
        .par_iter()
        .map(|(name, dir)| process(dir, name, &args.audio_out, &cfg).with_context(|| format!("bundle {name}")))
        .collect::<anyhow::Result<_>>()?;
    let mut rows = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(row) => rows.push(row),
            Outcome::Empty(name) => eprintln!("skipped {name}: no stem scored above {}", cfg.augment.stem_threshold),
            Outcome::Silent(name) => eprintln!("skipped {name}: no active segment after gating"),
        }
    }
    write_file(&args.out, to_jsonl(&rows))?;
    eprintln!("kept {} of {} bundles", rows.len(), dirs.len());
    Ok(())
}
