//! Short-time Fourier transform with weighted overlap-add resynthesis.
//!
//! Analysis and synthesis use the same periodic raised-cosine window; the
//! overlap-add is divided by the summed squared window, which makes the
//! round trip exact for any hop shorter than the window.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_ms: 32.0,
            hop_ms: 8.0,
        }
    }
}

impl StftConfig {
    /// Window and hop in samples at `fs`.
    pub fn sizes(&self, fs: f64) -> Result<(usize, usize)> {
        let win = (fs * self.window_ms / 1000.0).round() as usize;
        let hop = (fs * self.hop_ms / 1000.0).round() as usize;
        if hop == 0 || win < 2 || hop >= win {
            return Err(Error::Config(format!(
                "STFT needs 0 < hop < window (got window {win}, hop {hop} samples)"
            )));
        }
        Ok((win, hop))
    }
}

/// Full complex spectra, one per frame, plus what is needed to invert them.
#[derive(Debug, Clone, PartialEq)]
pub struct Stft {
    pub frames: Vec<Vec<Complex64>>,
    pub window: Vec<f64>,
    pub hop: usize,
    /// Length of the original signal.
    pub len: usize,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = FftPlanner::new();
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

/// Frames start at `-win + hop` so the first samples are covered by as many
/// windows as the middle ones.
fn frame_starts(len: usize, win: usize, hop: usize) -> impl Iterator<Item = isize> {
    let first = hop as isize - win as isize;
    (0..).map(move |k| first + (k * hop) as isize).take_while(move |&s| s < len as isize)
}

pub fn stft(signal: &[f64], fs: f64, cfg: &StftConfig) -> Result<Stft> {
    let (win, hop) = cfg.sizes(fs)?;
    if signal.is_empty() {
        return Err(Error::Signal("empty signal".into()));
    }
    let window = hann(win);
    let fft = plan(win, false);
    let frames = frame_starts(signal.len(), win, hop)
        .map(|start| {
            let mut buf: Vec<Complex64> = (0..win)
                .map(|i| {
                    let n = start + i as isize;
                    let v = if n >= 0 && (n as usize) < signal.len() {
                        signal[n as usize]
                    } else {
                        0.0
                    };
                    Complex64::new(v * window[i], 0.0)
                })
                .collect();
            fft.process(&mut buf);
            buf
        })
        .collect();
    Ok(Stft {
        frames,
        window,
        hop,
        len: signal.len(),
    })
}

pub fn istft(spec: &Stft) -> Result<Vec<f64>> {
    let win = spec.window.len();
    let fft = plan(win, true);
    let mut out = vec![0.0; spec.len];
    let mut norm = vec![0.0; spec.len];
    for (frame, start) in spec.frames.iter().zip(frame_starts(spec.len, win, spec.hop)) {
        if frame.len() != win {
            return Err(Error::Shape(format!("frame of {} bins for window {win}", frame.len())));
        }
        let mut buf = frame.clone();
        fft.process(&mut buf);
        for i in 0..win {
            let n = start + i as isize;
            if n >= 0 && (n as usize) < spec.len {
                let w = spec.window[i];
                out[n as usize] += buf[i].re / win as f64 * w;
                norm[n as usize] += w * w;
            }
        }
    }
    for (o, z) in out.iter_mut().zip(&norm) {
        if *z > 1e-12 {
            *o /= z;
        }
    }
    Ok(out)
}
