//! Activity detection on PCEN output (noise gate).

use serde::{Deserialize, Serialize};

use super::{pcen, DspError, PcenParams, Result, Spectrogram};

/// Mean over bands, per frame.
pub fn frame_activity(spec: &Spectrogram) -> Vec<f64> {
    let bands = spec.bands().max(1) as f64;
    spec.data().rows().into_iter().map(|r| r.sum() / bands).collect()
}

/// Frames with mean-over-bands activity above `threshold` form runs; runs
/// separated by gaps shorter than `merge_gap_s` are merged; merged segments
/// shorter than `min_dur_s` are dropped. Frame `i` spans
/// `[i / rate, (i + 1) / rate)`.
pub fn detect_activity(
    pcen_out: &Spectrogram,
    threshold: f64,
    min_dur_s: f64,
    merge_gap_s: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(DspError::InvalidParams(format!("threshold must be > 0, got {threshold}")));
    }
    let active: Vec<bool> = frame_activity(pcen_out).into_iter().map(|a| a > threshold).collect();
    Ok(segments_from_mask(&active, pcen_out.frame_rate_hz(), min_dur_s, merge_gap_s))
}

fn segments_from_mask(active: &[bool], rate: f64, min_dur_s: f64, merge_gap_s: f64) -> Vec<(f64, f64)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &a) in active.iter().enumerate() {
        match (a, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, active.len()));
    }

    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in runs {
        let (s, e) = (s as f64 / rate, e as f64 / rate);
        match merged.last_mut() {
            Some(last) if s - last.1 < merge_gap_s => last.1 = e,
            _ => merged.push((s, e)),
        }
    }
    merged.retain(|(s, e)| e - s >= min_dur_s);
    merged
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Absolute(f64),
    /// `median + k * MAD` of the clip's post-burn-in frame activity.
    MedianMad(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    pub threshold: Threshold,
    pub min_dur_s: f64,
    pub merge_gap_s: f64,
    /// Frames ignored at the clip start. `None` uses `ceil(10 / s)`, capped
    /// at half the clip so short recordings keep their second half.
    pub burn_in_frames: Option<usize>,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::MedianMad(1.5),
            min_dur_s: 0.5,
            merge_gap_s: 0.25,
            burn_in_frames: None,
        }
    }
}

pub fn median_mad_threshold(values: &[f64], k: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let med = median(values.to_vec());
    let mad = median(values.iter().map(|v| (v - med).abs()).collect());
    med + k * mad
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// PCEN followed by activity detection, skipping the burn-in frames.
pub fn gate_segments(energy: &Spectrogram, params: &PcenParams, cfg: &GateConfig) -> Result<Vec<(f64, f64)>> {
    let out = pcen(energy, params)?;
    let activity = frame_activity(&out);
    let burn = cfg
        .burn_in_frames
        .unwrap_or_else(|| params.burn_in_frames().min(activity.len() / 2));
    if burn >= activity.len() {
        return Ok(Vec::new());
    }
    let threshold = match cfg.threshold {
        Threshold::Absolute(t) => t,
        Threshold::MedianMad(k) => median_mad_threshold(&activity[burn..], k),
    };
    if !(threshold > 0.0) {
        return Ok(Vec::new());
    }
    let mask: Vec<bool> = activity
        .iter()
        .enumerate()
        .map(|(i, &a)| i >= burn && a > threshold)
        .collect();
    Ok(segments_from_mask(&mask, out.frame_rate_hz(), cfg.min_dur_s, cfg.merge_gap_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn from_levels(levels: &[f64], rate: f64) -> Spectrogram {
        Spectrogram::new(Array2::from_shape_fn((levels.len(), 2), |(t, _)| levels[t]), rate).unwrap()
    }

    #[test]
    fn all_below_threshold() {
        let s = from_levels(&[0.1, 0.2, 0.1], 10.0);
        assert!(detect_activity(&s, 0.5, 0.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn merge_across_one_frame_gap() {
        // lo hi hi lo hi lo at 10 frames/s: runs [0.1, 0.3) and [0.4, 0.5)
        let s = from_levels(&[0.0, 1.0, 1.0, 0.0, 1.0, 0.0], 10.0);
        let unmerged = detect_activity(&s, 0.5, 0.0, 0.05).unwrap();
        assert_eq!(unmerged.len(), 2);
        let merged = detect_activity(&s, 0.5, 0.0, 0.15).unwrap();
        assert_eq!(merged.len(), 1);
        assert!((merged[0].0 - 0.1).abs() < 1e-12 && (merged[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn short_segment_dropped() {
        let s = from_levels(&[0.0, 1.0, 0.0], 10.0);
        assert!(detect_activity(&s, 0.5, 0.2, 0.0).unwrap().is_empty());
        assert_eq!(detect_activity(&s, 0.5, 0.1, 0.0).unwrap().len(), 1);
    }

    #[test]
    fn run_to_end_of_clip() {
        let s = from_levels(&[0.0, 1.0, 1.0], 10.0);
        let seg = detect_activity(&s, 0.5, 0.0, 0.0).unwrap();
        assert!((seg[0].1 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn threshold_must_be_positive() {
        assert!(detect_activity(&from_levels(&[1.0], 1.0), 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn median_mad() {
        assert_eq!(median_mad_threshold(&[1.0, 2.0, 3.0, 4.0, 100.0], 1.5), 3.0 + 1.5 * 1.0);
        assert_eq!(median_mad_threshold(&[], 1.5), 0.0);
    }

    #[test]
    fn gate_finds_burst() {
        // stationary noise floor with a loud burst between 8.4 s and 9 s
        let rate = 50.0;
        let frames = 500;
        let data = Array2::from_shape_fn((frames, 8), |(t, b)| {
            let noise = 1.0 + 0.1 * b as f64;
            if (420..450).contains(&t) { noise * 400.0 } else { noise }
        });
        let spec = Spectrogram::new(data, rate).unwrap();
        let segs = gate_segments(&spec, &PcenParams::default(), &GateConfig::default()).unwrap();
        assert_eq!(segs.len(), 1, "{segs:?}");
        assert!((segs[0].0 - 8.4).abs() < 0.05, "{segs:?}");
        assert!(segs[0].1 > 8.9 && segs[0].1 <= 10.0, "{segs:?}");
    }
}
