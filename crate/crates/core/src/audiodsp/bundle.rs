//! Stem bundles produced by external separation + classification.
//!
//! Layout of one bundle directory:
//!
//! ```text
//! stem_0.wav .. stem_3.wav     separated stems (16-bit or float PCM)
//! probs_0.bin .. probs_3.bin   little-endian f32, row-major frames x classes
//! probs_0.json .. probs_3.json {"frames": N, "classes": 521, "frame_hop_s": 0.48}
//! ```
//!
//! A single `probs.json` may replace the per-stem sidecars when every stem
//! shares the same frame grid.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::wav::{read_wav, write_wav};
use super::{score_stem, DspError, Result, StemScore, Waveform, ANIMAL_CLASSES};

pub const AUDIOSET_CLASSES: usize = 521;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbsSidecar {
    pub frames: usize,
    pub classes: usize,
    pub frame_hop_s: f64,
}

#[derive(Debug, Clone)]
pub struct Stem {
    pub index: usize,
    pub waveform: Waveform,
    pub probs: Array2<f64>,
    pub sidecar: ProbsSidecar,
}

fn stem_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("stem_{i}.wav"))
}

/// Loads `stem_0`, `stem_1`, ... until the first missing index.
pub fn read_bundle(dir: impl AsRef<Path>) -> Result<Vec<Stem>> {
    let dir = dir.as_ref();
    let shared = dir.join("probs.json");
    let mut stems = Vec::new();
    for i in 0.. {
        let wav = stem_path(dir, i);
        if !wav.exists() {
            break;
        }
        let own = dir.join(format!("probs_{i}.json"));
        let sidecar_path = if own.exists() { own } else { shared.clone() };
        let sidecar: ProbsSidecar = serde_json::from_slice(&fs::read(&sidecar_path)?)?;
        let probs = read_probs(&dir.join(format!("probs_{i}.bin")), &sidecar)?;
        stems.push(Stem {
            index: i,
            waveform: read_wav(&wav)?,
            probs,
            sidecar,
        });
    }
    if stems.is_empty() {
        return Err(DspError::Shape(format!("{}: no stem_0.wav", dir.display())));
    }
    Ok(stems)
}

pub fn read_probs(path: &Path, sidecar: &ProbsSidecar) -> Result<Array2<f64>> {
    let bytes = fs::read(path)?;
    let expected = sidecar.frames * sidecar.classes * 4;
    if bytes.len() != expected {
        return Err(DspError::Shape(format!(
            "{}: {} bytes, sidecar implies {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Array2::from_shape_vec((sidecar.frames, sidecar.classes), values).map_err(|e| DspError::Shape(e.to_string()))
}

/// Scores every stem of a bundle over the animal class range.
pub fn score_bundle(stems: &[Stem]) -> Result<Vec<(Waveform, StemScore)>> {
    stems
        .iter()
        .map(|s| {
            let score = score_stem(s.probs.view(), ANIMAL_CLASSES)?;
            Ok((
                s.waveform.clone(),
                StemScore {
                    stem_id: format!("stem_{}", s.index),
                    score,
                },
            ))
        })
        .collect()
}

/// Writes a bundle in the layout above; used by fixtures and tests.
pub fn write_bundle(dir: impl AsRef<Path>, stems: &[(Waveform, Array2<f32>)], frame_hop_s: f64) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for (i, (wave, probs)) in stems.iter().enumerate() {
        write_wav(stem_path(dir, i), wave)?;
        let bytes: Vec<u8> = probs.iter().flat_map(|p| p.to_le_bytes()).collect();
        fs::write(dir.join(format!("probs_{i}.bin")), bytes)?;
        let sidecar = ProbsSidecar {
            frames: probs.nrows(),
            classes: probs.ncols(),
            frame_hop_s,
        };
        fs::write(dir.join(format!("probs_{i}.json")), serde_json::to_vec(&sidecar)?)?;
    }
    Ok(())
}
