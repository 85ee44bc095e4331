//! Autocorrelation F0 tracker for the reference signal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stand-in F0 for unvoiced frames; small enough that every SSI weight saturates.
pub const UNVOICED_EPSILON_HZ: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct F0Config {
    pub hop_ms: f64,
    pub window_ms: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// Minimum normalised autocorrelation peak for a voiced frame.
    pub voicing_threshold: f64,
    /// Frames quieter than this RMS (digital units) are unvoiced.
    pub min_rms: f64,
}

impl Default for F0Config {
    fn default() -> Self {
        Self {
            hop_ms: 10.0,
            window_ms: 40.0,
            f_min_hz: 70.0,
            f_max_hz: 400.0,
            voicing_threshold: 0.3,
            min_rms: 1e-5,
        }
    }
}

/// F0 per analysis frame; frame `k` is centred at `k * hop_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub f0_hz: Vec<f64>,
    pub hop_ms: f64,
    pub epsilon_hz: f64,
}

impl F0Track {
    pub fn is_voiced(&self, k: usize) -> bool {
        self.f0_hz[k] > self.epsilon_hz
    }

    pub fn voiced_values(&self) -> Vec<f64> {
        self.f0_hz
            .iter()
            .copied()
            .filter(|&f| f > self.epsilon_hz)
            .collect()
    }

    /// F0 at time `t_ms` (nearest frame, clamped to the track).
    pub fn at_ms(&self, t_ms: f64) -> f64 {
        if self.f0_hz.is_empty() {
            return self.epsilon_hz;
        }
        let k = (t_ms / self.hop_ms).round().max(0.0) as usize;
        self.f0_hz[k.min(self.f0_hz.len() - 1)]
    }

    /// F0 sampled at `n_frames` frames spaced `frame_shift_ms` apart.
    pub fn per_frame(&self, n_frames: usize, frame_shift_ms: f64) -> Vec<f64> {
        (0..n_frames)
            .map(|t| self.at_ms(t as f64 * frame_shift_ms))
            .collect()
    }
}

/// Normalised autocorrelation `r(lag)` of `w`, using the energies of both
/// overlapping segments.
fn normalized_acf(w: &[f64], lag: usize) -> f64 {
    let n = w.len() - lag;
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (w[i], w[i + lag]);
        xy += a * b;
        xx += a * a;
        yy += b * b;
    }
    if xx <= 0.0 || yy <= 0.0 {
        0.0
    } else {
        xy / (xx * yy).sqrt()
    }
}

fn frame_f0(w: &[f64], fs: f64, cfg: &F0Config) -> f64 {
    let rms = (w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64).sqrt();
    if rms < cfg.min_rms {
        return UNVOICED_EPSILON_HZ;
    }
    let min_lag = (fs / cfg.f_max_hz).floor().max(1.0) as usize;
    let max_lag = ((fs / cfg.f_min_hz).ceil() as usize).min(w.len() / 2);
    if max_lag <= min_lag + 1 {
        return UNVOICED_EPSILON_HZ;
    }
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1)
        .map(|lag| normalized_acf(w, lag))
        .collect();
    // r[i] is lag min_lag - 1 + i
    let peak = r[1..r.len() - 1].iter().copied().fold(f64::MIN, f64::max);
    if peak < cfg.voicing_threshold {
        return UNVOICED_EPSILON_HZ;
    }
    // earliest local maximum close to the global one avoids octave-down errors
    let i = (1..r.len() - 1)
        .find(|&i| r[i] >= 0.9 * peak && r[i] >= r[i - 1] && r[i] >= r[i + 1])
        .unwrap_or(1);
    let (y0, y1, y2) = (r[i - 1], r[i], r[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let delta = if denom.abs() > 1e-12 {
        (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let lag = (min_lag - 1 + i) as f64 + delta;
    fs / lag
}

/// Estimates the F0 contour of `signal`; unvoiced frames carry
/// [`UNVOICED_EPSILON_HZ`].
pub fn estimate_f0(signal: &[f64], fs: f64, cfg: &F0Config) -> F0Track {
    let hop = fs * cfg.hop_ms / 1000.0;
    let win = (fs * cfg.window_ms / 1000.0).round() as usize;
    let n_frames = if signal.is_empty() {
        0
    } else {
        (signal.len() as f64 / hop).ceil() as usize
    };
    let f0_hz = (0..n_frames)
        .into_par_iter()
        .map(|k| {
            let center = (k as f64 * hop).round() as isize;
            let start = center - (win / 2) as isize;
            let w: Vec<f64> = (0..win as isize)
                .map(|i| {
                    let n = start + i;
                    if n >= 0 && (n as usize) < signal.len() {
                        signal[n as usize]
                    } else {
                        0.0
                    }
                })
                .collect();
            frame_f0(&w, fs, cfg)
        })
        .collect();
    F0Track {
        f0_hz,
        hop_ms: cfg.hop_ms,
        epsilon_hz: UNVOICED_EPSILON_HZ,
    }
}
