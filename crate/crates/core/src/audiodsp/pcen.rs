//! Per-channel energy normalization.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DspError, Result};

/// Non-negative `frames x bands` energies.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Array2<f64>,
    frame_rate_hz: f64,
}

impl Spectrogram {
    pub fn new(data: Array2<f64>, frame_rate_hz: f64) -> Result<Self> {
        if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
            return Err(DspError::InvalidParams(format!("frame_rate_hz = {frame_rate_hz}")));
        }
        if let Some(((t, b), v)) = data.indexed_iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(DspError::InvalidParams(format!("energy at frame {t}, band {b} is {v}")));
        }
        Ok(Self { data, frame_rate_hz })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn bands(&self) -> usize {
        self.data.ncols()
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.frame_rate_hz
    }
}

/// PCEN constants. Defaults: s = 0.025, alpha = 0.98, delta = 2, r = 0.5,
/// eps = 1e-6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PcenParams {
    pub smoothing: f64,
    pub alpha: f64,
    pub delta: f64,
    pub root: f64,
    pub eps: f64,
}

impl Default for PcenParams {
    fn default() -> Self {
        Self {
            smoothing: 0.025,
            alpha: 0.98,
            delta: 2.0,
            root: 0.5,
            eps: 1e-6,
        }
    }
}

impl PcenParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        let ok = unit(self.smoothing)
            && unit(self.alpha)
            && unit(self.root)
            && self.delta >= 0.0
            && self.delta.is_finite()
            && self.eps > 0.0
            && self.eps.is_finite();
        if ok {
            Ok(())
        } else {
            Err(DspError::InvalidParams(format!("{self:?}")))
        }
    }

    /// Frames excluded from activity decisions after a (re)start: `10 / s`.
    pub fn burn_in_frames(&self) -> usize {
        (10.0 / self.smoothing).ceil() as usize
    }

    /// Output for a band whose energy has been constant at `e` long enough
    /// that the smoother equals `e`.
    pub fn steady_state(&self, e: f64) -> f64 {
        (e / (self.eps + e).powf(self.alpha) + self.delta).powf(self.root) - self.delta.powf(self.root)
    }
}

/// Per band: `M(t) = (1 - s) M(t-1) + s E(t)` with `M(0) = E(0)`, then
/// `(E / (eps + M)^alpha + delta)^r - delta^r`.
pub fn pcen(spec: &Spectrogram, p: &PcenParams) -> Result<Spectrogram> {
    p.validate()?;
    let e = spec.data();
    let mut out = Array2::<f64>::zeros(e.raw_dim());
    let delta_r = p.delta.powf(p.root);
    for band in 0..spec.bands() {
        let mut m = 0.0;
        for t in 0..spec.frames() {
            let x = e[[t, band]];
            m = if t == 0 { x } else { (1.0 - p.smoothing) * m + p.smoothing * x };
            out[[t, band]] = (x / (p.eps + m).powf(p.alpha) + p.delta).powf(p.root) - delta_r;
        }
    }
    Spectrogram::new(out, spec.frame_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn spec(frames: usize, bands: usize, f: impl Fn(usize, usize) -> f64) -> Spectrogram {
        Spectrogram::new(Array2::from_shape_fn((frames, bands), |(t, b)| f(t, b)), 100.0).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let out = pcen(&spec(50, 4, |_, _| 0.0), &PcenParams::default()).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_input_is_steady_state() {
        let p = PcenParams::default();
        let levels = [0.01, 1.0, 37.5, 1e4];
        let out = pcen(&spec(600, 4, |_, b| levels[b]), &p).unwrap();
        for (b, &e) in levels.iter().enumerate() {
            for t in p.burn_in_frames()..600 {
                assert!((out.data()[[t, b]] - p.steady_state(e)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn step_input_converges_to_steady_state() {
        let p = PcenParams::default();
        // starts at 5, steps to 1: smoother decays toward 1 geometrically
        let out = pcen(&spec(2000, 1, |t, _| if t == 0 { 5.0 } else { 1.0 }), &p).unwrap();
        let dev: Vec<f64> = (0..2000).map(|t| (out.data()[[t, 0]] - p.steady_state(1.0)).abs()).collect();
        for t in 1000..2000 {
            assert!(dev[t] < 1e-6, "frame {t}");
        }
        // successive deviations shrink by about (1 - s) once linearized
        for t in 200..400 {
            let rate = dev[t + 1] / dev[t];
            assert!((rate / (1.0 - p.smoothing) - 1.0).abs() < 0.05, "frame {t}: {rate}");
        }
    }

    #[test]
    fn normalization_limit() {
        let p = PcenParams {
            delta: 0.0,
            root: 1.0,
            alpha: 1.0,
            ..Default::default()
        };
        let out = pcen(&spec(10, 1, |_, _| 1e6), &p).unwrap();
        assert!((out.data()[[9, 0]] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_params_and_input() {
        let s = spec(2, 1, |_, _| 1.0);
        for bad in [
            PcenParams { smoothing: 0.0, ..Default::default() },
            PcenParams { alpha: 1.5, ..Default::default() },
            PcenParams { delta: -1.0, ..Default::default() },
            PcenParams { root: 0.0, ..Default::default() },
            PcenParams { eps: 0.0, ..Default::default() },
        ] {
            assert!(pcen(&s, &bad).is_err());
        }
        assert!(Spectrogram::new(Array2::from_elem((2, 2), -1.0), 10.0).is_err());
        assert!(Spectrogram::new(Array2::from_elem((2, 2), f64::NAN), 10.0).is_err());
    }
}
