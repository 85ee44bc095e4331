//! Stimulus construction: room reverberation, noise mixing at a target SNR,
//! and oracle ratio-mask enhancement.

pub mod stft;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::dsp::{convolve, db20, rms};
use crate::error::{Error, Result};

pub use stft::{istft, stft, Stft, StftConfig};

/// Full linear convolution of `signal` with `rir`
/// (`signal.len() + rir.len() - 1` samples).
pub fn apply_rir(signal: &[f64], rir: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() || rir.is_empty() {
        return Err(Error::Signal("signal and impulse response must be non-empty".into()));
    }
    Ok(convolve(signal, rir))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub mixture: Vec<f64>,
    pub scaled_noise: Vec<f64>,
    pub noise_gain: f64,
}

/// Adds `noise` to `speech` at `snr_db` (RMS ratio). Noise shorter than the
/// speech is repeated; longer noise is truncated from its start.
pub fn mix_at_snr(speech: &[f64], noise: &[f64], snr_db: f64) -> Result<Mixture> {
    if !snr_db.is_finite() {
        return Err(Error::Config("SNR must be finite".into()));
    }
    let rs = rms(speech);
    if speech.is_empty() || rs == 0.0 {
        return Err(Error::Signal("speech has zero energy".into()));
    }
    if noise.is_empty() {
        return Err(Error::Signal("noise is empty".into()));
    }
    let tiled: Vec<f64> = noise.iter().copied().cycle().take(speech.len()).collect();
    let rn = rms(&tiled);
    if rn == 0.0 {
        return Err(Error::Signal("noise has zero energy".into()));
    }
    let gain = rs / rn * 10f64.powf(-snr_db / 20.0);
    let scaled_noise: Vec<f64> = tiled.iter().map(|v| v * gain).collect();
    let mixture = speech.iter().zip(&scaled_noise).map(|(s, n)| s + n).collect();
    Ok(Mixture {
        mixture,
        scaled_noise,
        noise_gain: gain,
    })
}

/// SNR (dB) of `signal` against `noise`, both as separate components.
pub fn measured_snr_db(signal: &[f64], noise: &[f64]) -> f64 {
    db20(rms(signal) / rms(noise))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrmConfig {
    pub stft: StftConfig,
    /// Exponent applied to the power ratio.
    pub exponent: f64,
}

impl Default for IrmConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            exponent: 0.5,
        }
    }
}

/// Enhances `clean + noise` with the oracle mask
/// `(|S|² / (|S|² + |N|²))^exponent`. Bins where both are zero pass unchanged.
pub fn ideal_ratio_mask(clean: &[f64], noise: &[f64], fs: f64, cfg: &IrmConfig) -> Result<Vec<f64>> {
    if clean.len() != noise.len() {
        return Err(Error::Shape(format!(
            "clean has {} samples, noise {}",
            clean.len(),
            noise.len()
        )));
    }
    if !(cfg.exponent > 0.0) {
        return Err(Error::Config("mask exponent must be > 0".into()));
    }
    let s = stft(clean, fs, &cfg.stft)?;
    let n = stft(noise, fs, &cfg.stft)?;
    let mut mix = s.clone();
    for ((mf, sf), nf) in mix.frames.iter_mut().zip(&s.frames).zip(&n.frames) {
        for ((m, sv), nv) in mf.iter_mut().zip(sf).zip(nf) {
            let (ps, pn) = (sv.norm_sqr(), nv.norm_sqr());
            let mask = if ps + pn > 0.0 {
                (ps / (ps + pn)).powf(cfg.exponent)
            } else {
                1.0
            };
            *m = (sv + nv) * mask;
        }
    }
    istft(&mix)
}
