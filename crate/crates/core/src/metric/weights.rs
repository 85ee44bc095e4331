//! Channel weights: the F0-dependent SSI weight and the audibility-based
//! efficiency weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::EPgram;

pub const DEFAULT_H_MAX: f64 = 5.0;
pub const DEFAULT_ETA: f64 = 0.7;

/// Which weights enter the similarity numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Gesi,
    /// `w_i(τ) = 1` everywhere; useful for identity checks.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyWeights {
    pub weights: Vec<f64>,
    pub n_audible: usize,
    pub inaudible: bool,
}

/// Combined weights `w_i(τ) = ssi[i][τ] * eff[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub ssi: Vec<Vec<f64>>,
    pub eff: Vec<f64>,
    pub h_max: f64,
    pub eta: f64,
    pub n_audible: usize,
    pub inaudible: bool,
}

impl WeightSet {
    pub fn new(ssi: Vec<Vec<f64>>, eff: EfficiencyWeights, h_max: f64, eta: f64) -> Result<Self> {
        if ssi.len() != eff.weights.len() {
            return Err(Error::Shape(format!(
                "{} SSI rows vs {} efficiency weights",
                ssi.len(),
                eff.weights.len()
            )));
        }
        Ok(Self {
            ssi,
            eff: eff.weights,
            h_max,
            eta,
            n_audible: eff.n_audible,
            inaudible: eff.inaudible,
        })
    }

    /// All weights 1. The SSI rows are not normalised in this set.
    pub fn unit(n_channels: usize, n_frames: usize) -> Self {
        Self {
            ssi: vec![vec![1.0; n_frames]; n_channels],
            eff: vec![1.0; n_channels],
            h_max: DEFAULT_H_MAX,
            eta: 0.0,
            n_audible: n_channels,
            inaudible: false,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.eff.len()
    }

    pub fn n_frames(&self) -> usize {
        self.ssi.first().map_or(0, Vec::len)
    }

    pub fn combined(&self, i: usize, t: usize) -> f64 {
        self.ssi[i][t] * self.eff[i]
    }
}

/// SSI weights `[channel][frame]` from per-frame F0 values.
pub fn ssi_weight(f0_per_frame: &[f64], peak_freqs_hz: &[f64], h_max: f64) -> Result<Vec<Vec<f64>>> {
    if !(h_max > 0.0) {
        return Err(Error::Config("h_max must be > 0".into()));
    }
    if peak_freqs_hz.is_empty() {
        return Err(Error::Shape("no channels".into()));
    }
    let n = peak_freqs_hz.len();
    let mut w = vec![vec![0.0; f0_per_frame.len()]; n];
    for (t, &f0) in f0_per_frame.iter().enumerate() {
        let raw: Vec<f64> = peak_freqs_hz
            .iter()
            .map(|&fp| (fp / (h_max * f0)).min(1.0))
            .collect();
        let sum: f64 = raw.iter().sum();
        for (i, r) in raw.into_iter().enumerate() {
            w[i][t] = if sum > 0.0 { r / sum } else { 1.0 / n as f64 };
        }
    }
    Ok(w)
}

/// `(N / N_AT)^eta` for channels whose time-mean level is above threshold,
/// zero elsewhere.
pub fn efficiency_weight(ep_test: &EPgram, eta: f64) -> Result<EfficiencyWeights> {
    if !(eta >= 0.0) {
        return Err(Error::Config("eta must be >= 0".into()));
    }
    let means = ep_test.channel_means();
    let n = means.len();
    let audible: Vec<bool> = means.iter().map(|&m| m > 0.0).collect();
    let n_at = audible.iter().filter(|&&a| a).count();
    if n_at == 0 {
        return Ok(EfficiencyWeights {
            weights: vec![0.0; n],
            n_audible: 0,
            inaudible: true,
        });
    }
    let w = (n as f64 / n_at as f64).powf(eta);
    Ok(EfficiencyWeights {
        weights: audible.iter().map(|&a| if a { w } else { 0.0 }).collect(),
        n_audible: n_at,
        inaudible: false,
    })
}
