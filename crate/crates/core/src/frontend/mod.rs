//! Auditory front-end: turns a waveform into an EPgram, a channels x frames
//! matrix of excitation level in dB above the absolute threshold.
//!
//! Each channel is a gammatone band-pass on an ERB-spaced grid. The band
//! signal is half-wave rectified and low-pass filtered, averaged over each
//! frame, and converted to a sound pressure level using the configured
//! calibration. A listener's hearing loss is applied per channel as a
//! level-dependent attenuation (see [`loss`]) before referencing the level to
//! the absolute threshold.

pub mod gammatone;
pub mod loss;
pub mod threshold;

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{Biquad, BiquadState};
use crate::error::{Error, Result};
use crate::profiles::{interpolate_hl, ListenerProfile};

pub use gammatone::GammatoneFilter;
pub use loss::{io_loss, split_hl, HlSplit, LossModel};
pub use threshold::ThresholdCurve;

pub const MIN_SAMPLE_RATE: f64 = 16000.0;
pub const MAX_SAMPLE_RATE: f64 = 48000.0;

/// Highest channel centre as a fraction of the sample rate.
const MAX_CENTER_FRACTION: f64 = 0.45;

// amplitude floor before taking logs; far below any audible level
const LEVEL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendConfig {
    pub n_channels: usize,
    pub f_lo_hz: f64,
    /// Upper channel frequency; lowered to 0.45 fs when the rate requires it.
    pub f_hi_hz: f64,
    pub frame_shift_ms: f64,
    /// SPL (dB) of a signal whose RMS is 1.0 in digital units.
    pub calibration_db_spl: f64,
    pub envelope_cutoff_hz: f64,
    pub threshold: ThresholdCurve,
    pub loss: LossModel,
    /// Lower clamp of EPgram values (dB re threshold). `None` keeps raw values.
    pub ep_floor_db: Option<f64>,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            n_channels: 100,
            f_lo_hz: 100.0,
            f_hi_hz: 8000.0,
            frame_shift_ms: 0.5,
            // RMS of -26 dBFS presented at 63 dB SPL
            calibration_db_spl: 89.0,
            envelope_cutoff_hz: 150.0,
            threshold: ThresholdCurve::Iso226,
            loss: LossModel::default(),
            ep_floor_db: Some(0.0),
        }
    }
}

impl FrontendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_channels < 4 {
            return Err(Error::Config("n_channels must be >= 4".into()));
        }
        if !(self.f_lo_hz > 0.0 && self.f_lo_hz < self.f_hi_hz) {
            return Err(Error::Config("need 0 < f_lo_hz < f_hi_hz".into()));
        }
        if !(self.frame_shift_ms > 0.0) {
            return Err(Error::Config("frame_shift_ms must be > 0".into()));
        }
        if !(self.envelope_cutoff_hz > 0.0) {
            return Err(Error::Config("envelope_cutoff_hz must be > 0".into()));
        }
        self.loss.validate()
    }

    /// Upper channel frequency actually used at sample rate `fs`.
    pub fn effective_f_hi(&self, fs: f64) -> f64 {
        self.f_hi_hz.min(MAX_CENTER_FRACTION * fs)
    }

    pub fn frame_rate_hz(&self) -> f64 {
        1000.0 / self.frame_shift_ms
    }
}

/// Excitation-pattern sequence: `levels[channel][frame]` in dB re threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EPgram {
    pub levels: Vec<Vec<f64>>,
    pub peak_freqs_hz: Vec<f64>,
    pub frame_shift_ms: f64,
}

impl EPgram {
    pub fn n_channels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_frames(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn frame_rate_hz(&self) -> f64 {
        1000.0 / self.frame_shift_ms
    }

    /// Time average of each channel.
    pub fn channel_means(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|c| c.iter().sum::<f64>() / c.len().max(1) as f64)
            .collect()
    }

    pub fn same_shape(&self, other: &EPgram) -> bool {
        self.n_channels() == other.n_channels()
            && self.n_frames() == other.n_frames()
            && (self.frame_shift_ms - other.frame_shift_ms).abs() < 1e-12
    }
}

/// Unreferenced band levels (dB SPL) before threshold and loss are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLevels {
    pub levels_db_spl: Vec<Vec<f64>>,
    pub peak_freqs_hz: Vec<f64>,
    pub frame_shift_ms: f64,
}

/// Sample ranges `[start, end)` of each analysis frame.
pub fn frame_bounds(n_samples: usize, fs: f64, frame_shift_ms: f64) -> Vec<(usize, usize)> {
    let hop = fs * frame_shift_ms / 1000.0;
    let n_frames = (n_samples as f64 / hop + 1e-9).floor() as usize;
    (0..n_frames)
        .map(|t| {
            let start = (t as f64 * hop).round() as usize;
            let end = (((t + 1) as f64 * hop).round() as usize).min(n_samples);
            (start, end)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Filterbank {
    fs: f64,
    channels: Vec<GammatoneFilter>,
    envelope_lpf: Biquad,
    cfg: FrontendConfig,
}

impl Filterbank {
    pub fn new(cfg: &FrontendConfig, fs: f64) -> Result<Self> {
        cfg.validate()?;
        if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&fs) {
            return Err(Error::Signal(format!(
                "unsupported sample rate {fs} Hz (accepted: {MIN_SAMPLE_RATE}-{MAX_SAMPLE_RATE})"
            )));
        }
        let f_hi = cfg.effective_f_hi(fs);
        if f_hi <= cfg.f_lo_hz {
            return Err(Error::Config(format!(
                "f_lo_hz {} is above the usable range at {fs} Hz",
                cfg.f_lo_hz
            )));
        }
        let channels = gammatone::erb_space(cfg.f_lo_hz, f_hi, cfg.n_channels)
            .into_iter()
            .map(|fc| GammatoneFilter::new(fc, fs))
            .collect();
        Ok(Self {
            fs,
            channels,
            envelope_lpf: Biquad::lowpass(fs, cfg.envelope_cutoff_hz),
            cfg: cfg.clone(),
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.fs
    }

    pub fn channels(&self) -> &[GammatoneFilter] {
        &self.channels
    }

    pub fn peak_freqs_hz(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.center_hz).collect()
    }

    /// Delay (samples) between a band's input and its frame-level envelope.
    pub fn envelope_delay_samples(&self, channel: usize) -> f64 {
        // Butterworth group delay near DC: sqrt(2) / (2 pi fc)
        let lpf_delay = SQRT_2 / (2.0 * PI * self.cfg.envelope_cutoff_hz) * self.fs;
        self.channels[channel].group_delay_samples() + lpf_delay
    }

    pub fn band_levels(&self, signal: &[f64]) -> Result<BandLevels> {
        if signal.is_empty() {
            return Err(Error::Signal("empty signal".into()));
        }
        if signal.iter().any(|v| !v.is_finite()) {
            return Err(Error::Signal("signal contains non-finite samples".into()));
        }
        let bounds = frame_bounds(signal.len(), self.fs, self.cfg.frame_shift_ms);
        if bounds.is_empty() {
            return Err(Error::Signal(format!(
                "signal of {} samples is shorter than one {} ms frame",
                signal.len(),
                self.cfg.frame_shift_ms
            )));
        }
        // mean of a half-wave rectified sinusoid is A/pi; its RMS is A/sqrt(2)
        let to_rms = PI / SQRT_2;
        let cal = self.cfg.calibration_db_spl;
        let levels_db_spl = self
            .channels
            .par_iter()
            .map(|ch| {
                let band = ch.filter(signal);
                let mut lpf = BiquadState::default();
                let env: Vec<f64> = band
                    .iter()
                    .map(|&v| lpf.step(&self.envelope_lpf, v.max(0.0)))
                    .collect();
                bounds
                    .iter()
                    .map(|&(s, e)| {
                        let mean = env[s..e].iter().sum::<f64>() / (e - s) as f64;
                        20.0 * (mean * to_rms).max(LEVEL_FLOOR).log10() + cal
                    })
                    .collect()
            })
            .collect();
        Ok(BandLevels {
            levels_db_spl,
            peak_freqs_hz: self.peak_freqs_hz(),
            frame_shift_ms: self.cfg.frame_shift_ms,
        })
    }
}

/// Per-channel active/passive split of `profile`'s audiogram.
pub fn channel_splits(
    peak_freqs_hz: &[f64],
    profile: &ListenerProfile,
    model: &LossModel,
) -> Result<Vec<HlSplit>> {
    peak_freqs_hz
        .iter()
        .map(|&f| {
            // better-than-reference thresholds are not modelled as gain
            let total = interpolate_hl(&profile.audiogram, f).max(0.0);
            split_hl(total, profile.alpha, model.c_act_cap_db)
        })
        .collect()
}

/// Applies a listener's loss and the threshold datum to band levels.
pub fn epgram_from_levels(
    levels: &BandLevels,
    profile: &ListenerProfile,
    cfg: &FrontendConfig,
) -> Result<EPgram> {
    let splits = channel_splits(&levels.peak_freqs_hz, profile, &cfg.loss)?;
    let floor = cfg.ep_floor_db.unwrap_or(f64::NEG_INFINITY);
    let out = levels
        .levels_db_spl
        .iter()
        .zip(&levels.peak_freqs_hz)
        .zip(&splits)
        .map(|((row, &fp), split)| {
            let at = cfg.threshold.at(fp);
            row.iter()
                .map(|&l| (l - io_loss(l, split, &cfg.loss) - at).max(floor))
                .collect()
        })
        .collect();
    Ok(EPgram {
        levels: out,
        peak_freqs_hz: levels.peak_freqs_hz.clone(),
        frame_shift_ms: levels.frame_shift_ms,
    })
}

/// EPgram of `signal` (sample rate `fs`) as heard by `profile`.
pub fn analyze_epgram(
    signal: &[f64],
    fs: f64,
    profile: &ListenerProfile,
    cfg: &FrontendConfig,
) -> Result<EPgram> {
    let fb = Filterbank::new(cfg, fs)?;
    let levels = fb.band_levels(signal)?;
    epgram_from_levels(&levels, profile, cfg)
}
