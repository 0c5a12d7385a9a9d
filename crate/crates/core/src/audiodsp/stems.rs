//! Scoring separated stems against AudioSet animal classes and mixing the
//! animal-dominated ones back together.

use std::ops::RangeInclusive;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::{DspError, Result};

/// AudioSet ontology indices of the animal classes.
pub const ANIMAL_CLASSES: RangeInclusive<usize> = 67..=131;
/// Stems must score strictly above this to be mixed.
pub const STEM_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemScore {
    pub stem_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl Waveform {
    pub fn new(sample_rate: u32, samples: Vec<f32>) -> Self {
        Self { sample_rate, samples }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }
}

/// Mean over frames of the per-frame maximum over `classes` (column index
/// equals class id).
pub fn score_stem(probs: ArrayView2<'_, f64>, classes: RangeInclusive<usize>) -> Result<f64> {
    if probs.ncols() <= *classes.end() {
        return Err(DspError::Shape(format!(
            "need at least {} class columns, got {}",
            classes.end() + 1,
            probs.ncols()
        )));
    }
    let columns: Vec<usize> = classes.collect();
    score_columns(probs, &columns)
}

/// Like [`score_stem`] for matrices whose columns carry explicit class ids.
pub fn score_stem_mapped(
    probs: ArrayView2<'_, f64>,
    column_class_ids: &[usize],
    classes: RangeInclusive<usize>,
) -> Result<f64> {
    if column_class_ids.len() != probs.ncols() {
        return Err(DspError::Shape(format!(
            "{} class ids for {} columns",
            column_class_ids.len(),
            probs.ncols()
        )));
    }
    let columns: Vec<usize> = column_class_ids
        .iter()
        .enumerate()
        .filter(|(_, id)| classes.contains(id))
        .map(|(col, _)| col)
        .collect();
    if columns.is_empty() {
        return Err(DspError::Shape("no column maps into the class range".into()));
    }
    score_columns(probs, &columns)
}

fn score_columns(probs: ArrayView2<'_, f64>, columns: &[usize]) -> Result<f64> {
    if probs.nrows() == 0 {
        return Err(DspError::Shape("probability matrix has no frames".into()));
    }
    let mut total = 0.0;
    for (frame, row) in probs.rows().into_iter().enumerate() {
        let mut best = 0.0f64;
        for &c in columns {
            let p = row[c];
            if !(0.0..=1.0).contains(&p) {
                return Err(DspError::InvalidProbability { frame, column: c, value: p });
            }
            best = best.max(p);
        }
        total += best;
    }
    Ok(total / probs.nrows() as f64)
}

/// Sample-wise sum of the stems scoring strictly above `threshold`.
pub fn select_and_mix_stems(stems: &[(Waveform, StemScore)], threshold: f64) -> Result<Waveform> {
    let Some((first, _)) = stems.first() else {
        return Err(DspError::EmptyMix);
    };
    for (w, s) in stems {
        if w.samples.len() != first.samples.len() || w.sample_rate != first.sample_rate {
            return Err(DspError::ShapeMismatch(format!(
                "{}: {} samples @ {} Hz vs {} @ {} Hz",
                s.stem_id,
                w.samples.len(),
                w.sample_rate,
                first.samples.len(),
                first.sample_rate
            )));
        }
    }
    let mut mix = vec![0.0f32; first.samples.len()];
    let mut used = 0;
    for (w, _) in stems.iter().filter(|(_, s)| s.score > threshold) {
        for (m, x) in mix.iter_mut().zip(&w.samples) {
            *m += x;
        }
        used += 1;
    }
    if used == 0 {
        return Err(DspError::EmptyMix);
    }
    Ok(Waveform::new(first.sample_rate, mix))
}
