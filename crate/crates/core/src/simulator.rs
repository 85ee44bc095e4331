//! Hearing-loss simulator: renders a signal so that a normal-hearing analysis
//! of the output approximates the target listener's analysis of the input.
//!
//! The input is split by zero-phase gammatone filters, each band is scaled by
//! a time-varying gain equal to the EPgram difference between the listener
//! and normal hearing, and the bands are summed. The filterbank's composite
//! power response is normalised to unity over the channel range, so a zero
//! gain everywhere reproduces the in-band input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{epgram_from_levels, EPgram, Filterbank, FrontendConfig};
use crate::profiles::ListenerProfile;

pub const DEFAULT_SMOOTH_MS: f64 = 2.0;

// channels rendered per parallel batch; bounds peak memory
const CHANNEL_BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorConfig {
    pub smooth_ms: f64,
    pub frontend: FrontendConfig,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            smooth_ms: DEFAULT_SMOOTH_MS,
            frontend: FrontendConfig::default(),
        }
    }
}

/// Per-channel gain in dB, `gains_db[channel][frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTrajectory {
    pub gains_db: Vec<Vec<f64>>,
    pub frame_shift_ms: f64,
    pub smooth_ms: f64,
}

impl GainTrajectory {
    pub fn n_channels(&self) -> usize {
        self.gains_db.len()
    }

    pub fn n_frames(&self) -> usize {
        self.gains_db.first().map_or(0, Vec::len)
    }

    /// Writes one row per channel, one column per frame.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for row in &self.gains_db {
            w.write_record(row.iter().map(|g| format!("{g:.4}")))?;
        }
        w.flush().map_err(|e| Error::io("<gain trajectory>", e))?;
        Ok(())
    }
}

/// Forward-backward one-pole smoothing with time constant `tau_frames`.
fn smooth(x: &[f64], tau_frames: f64) -> Vec<f64> {
    if tau_frames <= 0.0 || x.is_empty() {
        return x.to_vec();
    }
    let a = (-1.0 / tau_frames).exp();
    let mut y = x.to_vec();
    let mut s = y[0];
    for v in y.iter_mut() {
        s = a * s + (1.0 - a) * *v;
        *v = s;
    }
    let mut s = *y.last().unwrap();
    for v in y.iter_mut().rev() {
        s = a * s + (1.0 - a) * *v;
        *v = s;
    }
    y
}

/// `ep_hl - ep_nh` per cell, smoothed along time.
pub fn gain_trajectory(ep_nh: &EPgram, ep_hl: &EPgram, smooth_ms: f64) -> Result<GainTrajectory> {
    if !ep_nh.same_shape(ep_hl) {
        return Err(Error::Shape(format!(
            "normal-hearing EPgram {}x{} vs listener {}x{}",
            ep_nh.n_channels(),
            ep_nh.n_frames(),
            ep_hl.n_channels(),
            ep_hl.n_frames()
        )));
    }
    if !(smooth_ms >= 0.0) {
        return Err(Error::Config("smooth_ms must be >= 0".into()));
    }
    let tau = smooth_ms / ep_nh.frame_shift_ms;
    let gains_db = ep_nh
        .levels
        .iter()
        .zip(&ep_hl.levels)
        .map(|(n, h)| {
            let diff: Vec<f64> = n.iter().zip(h).map(|(a, b)| b - a).collect();
            smooth(&diff, tau)
        })
        .collect();
    Ok(GainTrajectory {
        gains_db,
        frame_shift_ms: ep_nh.frame_shift_ms,
        smooth_ms,
    })
}

/// Mean of the summed squared channel magnitudes over the channel range,
/// sampled on a log-frequency grid.
fn composite_power(fb: &Filterbank) -> f64 {
    let ch = fb.channels();
    let (lo, hi) = (ch[0].center_hz, ch[ch.len() - 1].center_hz);
    let n = 400;
    (0..n)
        .map(|k| {
            let f = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
            ch.iter().map(|c| c.magnitude(f).powi(2)).sum::<f64>()
        })
        .sum::<f64>()
        / n as f64
}

/// Gain (dB) of channel `ch` at every sample, interpolated between frame
/// centres and advanced by the analysis envelope delay.
fn gain_per_sample(g: &[f64], n: usize, hop: f64, delay: f64) -> Vec<f64> {
    let last = g.len() - 1;
    (0..n)
        .map(|i| {
            let pos = ((i as f64 + delay) / hop - 0.5).max(0.0);
            let k = pos.floor() as usize;
            if k >= last {
                return g[last];
            }
            let frac = pos - k as f64;
            g[k] + frac * (g[k + 1] - g[k])
        })
        .collect()
}

/// Simulated-loss rendering of `signal` plus the gains that produced it.
pub fn synthesize_hl_with_gains(
    signal: &[f64],
    fs: f64,
    profile: &ListenerProfile,
    cfg: &SimulatorConfig,
) -> Result<(Vec<f64>, GainTrajectory)> {
    profile.validate()?;
    // gains need the loss at every level, including below threshold
    let raw = FrontendConfig {
        ep_floor_db: None,
        ..cfg.frontend.clone()
    };
    let fb = Filterbank::new(&raw, fs)?;
    let levels = fb.band_levels(signal)?;
    let ep_nh = epgram_from_levels(&levels, &ListenerProfile::normal_hearing(), &raw)?;
    let ep_hl = epgram_from_levels(&levels, profile, &raw)?;
    let gains = gain_trajectory(&ep_nh, &ep_hl, cfg.smooth_ms)?;

    let norm = composite_power(&fb);
    let hop = fs * raw.frame_shift_ms / 1000.0;
    let n = signal.len();
    let mut out = vec![0.0; n];
    let idx: Vec<usize> = (0..fb.channels().len()).collect();
    for batch in idx.chunks(CHANNEL_BATCH) {
        let parts: Vec<Vec<f64>> = batch
            .par_iter()
            .map(|&c| {
                let band = fb.channels()[c].filter_zero_phase(signal);
                let g = gain_per_sample(&gains.gains_db[c], n, hop, fb.envelope_delay_samples(c));
                band.iter()
                    .zip(g)
                    .map(|(b, gdb)| b * 10f64.powf(gdb / 20.0) / norm)
                    .collect()
            })
            .collect();
        for p in parts {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
    }
    Ok((out, gains))
}

/// Simulated-loss rendering of `signal`; same length as the input.
pub fn synthesize_hl(signal: &[f64], fs: f64, profile: &ListenerProfile, cfg: &SimulatorConfig) -> Result<Vec<f64>> {
    synthesize_hl_with_gains(signal, fs, profile, cfg).map(|(y, _)| y)
}
