use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};

use super::{DspError, Result, Spectrogram};

/// Hann-windowed power spectrogram pooled into `n_bands` equal-width linear
/// bands (DC excluded). Only meant as PCEN input for gating.
pub fn energy_spectrogram(
    samples: &[f32],
    sample_rate: u32,
    frame_len: usize,
    hop: usize,
    n_bands: usize,
) -> Result<Spectrogram> {
    if frame_len < 4 || hop == 0 || n_bands == 0 || n_bands > frame_len / 2 || sample_rate == 0 {
        return Err(DspError::InvalidParams(format!(
            "frame_len {frame_len}, hop {hop}, n_bands {n_bands}, sample_rate {sample_rate}"
        )));
    }
    let frames = if samples.len() < frame_len {
        usize::from(!samples.is_empty())
    } else {
        1 + (samples.len() - frame_len) / hop
    };
    let window: Vec<f32> = (0..frame_len)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f32::consts::PI * i as f32 / frame_len as f32).cos())
        .collect();
    let fft = FftPlanner::<f32>::new().plan_fft_forward(frame_len);
    let bins = frame_len / 2;
    let mut buf = vec![Complex::new(0.0f32, 0.0); frame_len];
    let mut out = Array2::<f64>::zeros((frames, n_bands));
    for t in 0..frames {
        let start = t * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            let x = samples.get(start + i).copied().unwrap_or(0.0);
            *b = Complex::new(x * window[i], 0.0);
        }
        fft.process(&mut buf);
        for k in 1..=bins {
            let band = ((k - 1) * n_bands / bins).min(n_bands - 1);
            out[[t, band]] += f64::from(buf[k].norm_sqr());
        }
    }
    Spectrogram::new(out, f64::from(sample_rate) / hop as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_lands_in_its_band() {
        let sr = 16_000;
        let tone: Vec<f32> = (0..sr).map(|i| (2.0 * std::f32::consts::PI * 3000.0 * i as f32 / sr as f32).sin()).collect();
        let s = energy_spectrogram(&tone, sr as u32, 512, 256, 8).unwrap();
        assert_eq!(s.bands(), 8);
        assert!((s.frame_rate_hz() - 62.5).abs() < 1e-12);
        let row = s.data().row(10);
        // 3 kHz of an 8 kHz Nyquist, 8 bands of 1 kHz: band 2 or 3
        let best = (0..8).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!(best == 2 || best == 3, "{row:?}");
    }

    #[test]
    fn silence_is_zero() {
        let s = energy_spectrogram(&[0.0; 4000], 16_000, 256, 128, 4).unwrap();
        assert!(s.data().iter().all(|&v| v == 0.0));
    }
}
