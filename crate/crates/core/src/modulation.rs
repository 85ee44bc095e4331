//! Modulation filterbank applied to each EPgram channel trajectory.
//!
//! Band 1 is a first-order low-pass at the first centre frequency; the other
//! bands are second-order band-passes with constant Q. All filters are causal
//! and start from zero state, so the first few hundred milliseconds of each
//! output contain the settling transient of the lowest bands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::Biquad;
use crate::error::{Error, Result};
use crate::frontend::EPgram;
use crate::profiles::Tmtf;

pub const MAX_MODULATION_HZ: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfbConfig {
    /// First entry is the low-pass cutoff, the rest are band-pass centres.
    pub center_freqs_hz: Vec<f64>,
    pub q: f64,
}

impl Default for MfbConfig {
    fn default() -> Self {
        Self {
            center_freqs_hz: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            q: 1.0,
        }
    }
}

impl MfbConfig {
    pub fn n_bands(&self) -> usize {
        self.center_freqs_hz.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.center_freqs_hz;
        if c.len() < 2 {
            return Err(Error::Config("modulation filterbank needs at least 2 bands".into()));
        }
        if c[0] <= 0.0 || c.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "modulation centre frequencies must be positive and ascending".into(),
            ));
        }
        if c[c.len() - 1] > MAX_MODULATION_HZ {
            return Err(Error::Config(format!(
                "modulation centres are limited to {MAX_MODULATION_HZ} Hz"
            )));
        }
        if !(self.q > 0.0) {
            return Err(Error::Config("modulation filter Q must be > 0".into()));
        }
        Ok(())
    }

    pub fn filters(&self, frame_rate_hz: f64) -> Vec<Biquad> {
        self.center_freqs_hz
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                if j == 0 {
                    Biquad::first_order_lowpass(frame_rate_hz, f)
                } else {
                    Biquad::bandpass(frame_rate_hz, f, self.q)
                }
            })
            .collect()
    }
}

/// MFB outputs `values[channel][band][frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationEnvelopes {
    pub values: Vec<Vec<Vec<f64>>>,
    pub config: MfbConfig,
}

impl ModulationEnvelopes {
    pub fn n_channels(&self) -> usize {
        self.values.len()
    }

    pub fn n_bands(&self) -> usize {
        self.config.n_bands()
    }

    pub fn n_frames(&self) -> usize {
        self.values
            .first()
            .and_then(|c| c.first())
            .map_or(0, Vec::len)
    }

    pub fn scaled(&self, g: f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|c| c.iter().map(|b| b.iter().map(|v| v * g).collect()).collect())
                .collect(),
            config: self.config.clone(),
        }
    }
}

fn lowpass_gain(f: f64, fc: f64) -> f64 {
    1.0 / (1.0 + (f / fc).powi(2)).sqrt()
}

/// Peak gains of each band for the reference (normal-hearing TMTF) and the
/// test (listener TMTF). Band 1 is fixed at unity for both.
pub fn tmtf_gains(cfg: &MfbConfig, tmtf_nh: &Tmtf, tmtf_hl: &Tmtf) -> Result<(Vec<f64>, Vec<f64>)> {
    tmtf_nh.validate()?;
    tmtf_hl.validate()?;
    let sensitivity = 10f64.powf((tmtf_nh.lps_db - tmtf_hl.lps_db) / 20.0);
    let (mut a_ref, mut a_test): (Vec<f64>, Vec<f64>) = cfg
        .center_freqs_hz
        .iter()
        .map(|&f| {
            (
                lowpass_gain(f, tmtf_nh.fc_hz),
                sensitivity * lowpass_gain(f, tmtf_hl.fc_hz),
            )
        })
        .unzip();
    if let (Some(r), Some(t)) = (a_ref.first_mut(), a_test.first_mut()) {
        *r = 1.0;
        *t = 1.0;
    }
    Ok((a_ref, a_test))
}

/// Runs every channel of `ep` through the filterbank, scaling band `j` by `gains[j]`.
pub fn mod_envelopes(ep: &EPgram, gains: &[f64], cfg: &MfbConfig) -> Result<ModulationEnvelopes> {
    cfg.validate()?;
    if gains.len() != cfg.n_bands() {
        return Err(Error::Shape(format!(
            "{} gains for {} modulation bands",
            gains.len(),
            cfg.n_bands()
        )));
    }
    let rate = ep.frame_rate_hz();
    let top = cfg.center_freqs_hz[cfg.n_bands() - 1];
    if rate < 2.0 * top {
        return Err(Error::Config(format!(
            "EPgram frame rate {rate} Hz is below twice the top modulation band {top} Hz"
        )));
    }
    let filters = cfg.filters(rate);
    let values = ep
        .levels
        .par_iter()
        .map(|traj| {
            filters
                .iter()
                .zip(gains)
                .map(|(f, &g)| f.filter(traj).into_iter().map(|v| v * g).collect())
                .collect()
        })
        .collect();
    Ok(ModulationEnvelopes {
        values,
        config: cfg.clone(),
    })
}
