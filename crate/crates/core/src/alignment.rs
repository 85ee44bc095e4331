//! Time alignment between reference and test.
//!
//! Alignment happens twice: once globally on the waveforms, then per channel
//! on the EPgrams with the correction limited to `±t_ma_ms`.
//!
//! Lag sign convention: a positive lag means the test signal is *delayed*
//! relative to the reference, i.e. `test[n + lag] ≈ ref[n]`. The peak is
//! taken on `|correlation|`, so a polarity-inverted test aligns the same way
//! as the original.

use serde::{Deserialize, Serialize};

use crate::dsp::{cross_correlation, peak_lag};
use crate::error::{Error, Result};
use crate::frontend::EPgram;

/// Default maximum per-channel correction (ms).
pub const DEFAULT_T_MA_MS: f64 = 30.0;

/// Fill value for frames vacated by a channel shift (the threshold floor).
pub const FILL_DB: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub global_lag_samples: isize,
    pub channel_lags_frames: Vec<isize>,
    pub t_ma_ms: f64,
    pub frame_shift_ms: f64,
}

impl AlignmentReport {
    pub fn max_abs_channel_lag(&self) -> isize {
        self.channel_lags_frames.iter().map(|l| l.abs()).max().unwrap_or(0)
    }

    pub fn mean_abs_channel_lag(&self) -> f64 {
        if self.channel_lags_frames.is_empty() {
            return 0.0;
        }
        self.channel_lags_frames.iter().map(|l| l.abs() as f64).sum::<f64>()
            / self.channel_lags_frames.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAlignment {
    pub lag_samples: isize,
    pub reference: Vec<f64>,
    pub test: Vec<f64>,
}

/// Finds the lag maximising the full cross-correlation and trims both
/// signals to their overlap.
pub fn global_align(reference: &[f64], test: &[f64]) -> Result<GlobalAlignment> {
    if reference.is_empty() || test.is_empty() {
        return Err(Error::Signal("global alignment needs non-empty signals".into()));
    }
    let xc = cross_correlation(reference, test);
    let lag = peak_lag(&xc, reference.len() - 1).unwrap_or(0);
    let (r0, t0) = if lag >= 0 {
        (0, lag as usize)
    } else {
        ((-lag) as usize, 0)
    };
    let len = (reference.len() - r0).min(test.len().saturating_sub(t0));
    if len == 0 {
        return Err(Error::Signal("no overlap left after global alignment".into()));
    }
    Ok(GlobalAlignment {
        lag_samples: lag,
        reference: reference[r0..r0 + len].to_vec(),
        test: test[t0..t0 + len].to_vec(),
    })
}

/// Largest per-channel correction in frames for the given limit.
pub fn max_lag_frames(t_ma_ms: f64, frame_shift_ms: f64) -> isize {
    (t_ma_ms / frame_shift_ms + 1e-9).floor() as isize
}

fn demean(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len().max(1) as f64;
    x.iter().map(|v| v - m).collect()
}

/// Lag of `test` relative to `reference` for one channel trajectory, clamped
/// to `±max_lag`.
pub fn channel_lag(reference: &[f64], test: &[f64], max_lag: isize) -> isize {
    let xc = cross_correlation(&demean(reference), &demean(test));
    peak_lag(&xc, reference.len() - 1)
        .unwrap_or(0)
        .clamp(-max_lag, max_lag)
}

/// Shifts `x` earlier by `lag` frames (later for negative lags), filling
/// vacated frames with [`FILL_DB`].
pub fn shift_trajectory(x: &[f64], lag: isize) -> Vec<f64> {
    let n = x.len() as isize;
    (0..n)
        .map(|t| {
            let src = t + lag;
            if (0..n).contains(&src) {
                x[src as usize]
            } else {
                FILL_DB
            }
        })
        .collect()
}

/// Aligns each test channel to the matching reference channel.
///
/// The reference is only read. Returns the aligned test EPgram and a report
/// whose `global_lag_samples` is zero; callers that also ran
/// [`global_align`] fill it in.
pub fn channel_align(ep_ref: &EPgram, ep_test: &EPgram, t_ma_ms: f64) -> Result<(EPgram, AlignmentReport)> {
    if !ep_ref.same_shape(ep_test) {
        return Err(Error::Shape(format!(
            "reference EPgram {}x{} vs test {}x{}",
            ep_ref.n_channels(),
            ep_ref.n_frames(),
            ep_test.n_channels(),
            ep_test.n_frames()
        )));
    }
    if !(t_ma_ms >= 0.0) {
        return Err(Error::Config("t_ma_ms must be >= 0".into()));
    }
    let max_lag = max_lag_frames(t_ma_ms, ep_ref.frame_shift_ms);
    let (levels, lags): (Vec<_>, Vec<_>) = ep_ref
        .levels
        .iter()
        .zip(&ep_test.levels)
        .map(|(r, t)| {
            let lag = channel_lag(r, t, max_lag);
            (shift_trajectory(t, lag), lag)
        })
        .unzip();
    Ok((
        EPgram {
            levels,
            peak_freqs_hz: ep_test.peak_freqs_hz.clone(),
            frame_shift_ms: ep_test.frame_shift_ms,
        },
        AlignmentReport {
            global_lag_samples: 0,
            channel_lags_frames: lags,
            t_ma_ms,
            frame_shift_ms: ep_ref.frame_shift_ms,
        },
    ))
}
