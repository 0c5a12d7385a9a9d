//! Synthetic instrument mixtures for the counting and naming tasks.

use super::{DspError, Result, Waveform};
use crate::rng::DetRng;

pub const MAX_MIXTURE_SOURCES: usize = 3;
const TARGET_PEAK: f32 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub waveform: Waveform,
    pub count: usize,
    /// instrument names, sorted
    pub names: Vec<String>,
}

/// Layers one to three named sources at unity gain. The mix is as long as
/// the longest source; shorter sources start at a seeded random offset.
/// If the summed peak exceeds full scale the mix is rescaled to 0.9 peak.
pub fn synth_mixture(sources: &[(Waveform, String)], seed: u64) -> Result<Mixture> {
    if sources.is_empty() {
        return Err(DspError::InvalidParams("no sources".into()));
    }
    if sources.len() > MAX_MIXTURE_SOURCES {
        return Err(DspError::TooManySources {
            max: MAX_MIXTURE_SOURCES,
            got: sources.len(),
        });
    }
    let mut names: Vec<String> = sources.iter().map(|(_, n)| n.clone()).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(DspError::NameCollision(w[0].clone()));
    }
    let rate = sources[0].0.sample_rate;
    if let Some((_, n)) = sources.iter().find(|(w, _)| w.sample_rate != rate) {
        return Err(DspError::ShapeMismatch(format!("{n}: sample rate differs from {rate} Hz")));
    }

    let len = sources.iter().map(|(w, _)| w.samples.len()).max().unwrap_or(0);
    let mut rng = DetRng::new(seed);
    let mut mix = vec![0.0f32; len];
    for (w, _) in sources {
        let slack = len - w.samples.len();
        let offset = if slack > 0 { rng.below(slack + 1) } else { 0 };
        for (m, x) in mix[offset..].iter_mut().zip(&w.samples) {
            *m += x;
        }
    }
    let mut waveform = Waveform::new(rate, mix);
    let peak = waveform.peak();
    if peak > 1.0 {
        let g = TARGET_PEAK / peak;
        waveform.samples.iter_mut().for_each(|x| *x *= g);
    }
    Ok(Mixture {
        waveform,
        count: sources.len(),
        names,
    })
}
