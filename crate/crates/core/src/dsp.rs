//! Small DSP building blocks shared by the analysis stages.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Direct-form-I second-order section, normalised so `a0 == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Band-pass with 0 dB peak gain at `f0` (bilinear, pre-warped).
    pub fn bandpass(fs: f64, f0: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b0: alpha / a0,
            b1: 0.0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// Butterworth (Q = 1/sqrt 2) low-pass.
    pub fn lowpass(fs: f64, fc: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + std::f64::consts::SQRT_2 * k + k * k);
        Self {
            b0: k * k * norm,
            b1: 2.0 * k * k * norm,
            b2: k * k * norm,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - std::f64::consts::SQRT_2 * k + k * k) * norm,
        }
    }

    /// First-order low-pass realised as a degenerate biquad (bilinear).
    pub fn first_order_lowpass(fs: f64, fc: f64) -> Self {
        let k = (PI * fc / fs).tan();
        let norm = 1.0 / (1.0 + k);
        Self {
            b0: k * norm,
            b1: k * norm,
            b2: 0.0,
            a1: (k - 1.0) * norm,
            a2: 0.0,
        }
    }

    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * f / fs);
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }

    pub fn magnitude(&self, f: f64, fs: f64) -> f64 {
        self.response(f, fs).norm()
    }

    /// Filters `input` from zero initial state.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut state = BiquadState::default();
        input.iter().map(|&x| state.step(self, x)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BiquadState {
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl BiquadState {
    #[inline]
    pub fn step(&mut self, c: &Biquad, x: f64) -> f64 {
        let y = c.b0 * x + c.b1 * self.x1 + c.b2 * self.x2 - c.a1 * self.y1 - c.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

fn fft_len(n: usize) -> usize {
    n.next_power_of_two()
}

fn fft_real(planner: &mut FftPlanner<f64>, x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(n).process(&mut buf);
    buf
}

/// Full linear cross-correlation `c[k] = sum_n a[n] * b[n + k]`.
///
/// Returned vector index `i` holds lag `k = i - (a.len() - 1)`, covering
/// `-(a.len() - 1) ..= b.len() - 1`.
pub fn cross_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = fft_len(out_len);
    let mut planner = FftPlanner::new();
    // correlation = convolution of reversed a with b
    let rev: Vec<f64> = a.iter().rev().copied().collect();
    let fa = fft_real(&mut planner, &rev, n);
    let mut fb = fft_real(&mut planner, b, n);
    for (y, x) in fb.iter_mut().zip(&fa) {
        *y *= x;
    }
    planner.plan_fft_inverse(n).process(&mut fb);
    fb[..out_len].iter().map(|c| c.re / n as f64).collect()
}

/// Full linear convolution of length `x.len() + h.len() - 1`.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    if x.len().min(h.len()) <= 32 {
        let mut out = vec![0.0; out_len];
        for (i, &xv) in x.iter().enumerate() {
            for (j, &hv) in h.iter().enumerate() {
                out[i + j] += xv * hv;
            }
        }
        return out;
    }
    let n = fft_len(out_len);
    let mut planner = FftPlanner::new();
    let fx = fft_real(&mut planner, x, n);
    let mut fh = fft_real(&mut planner, h, n);
    for (y, v) in fh.iter_mut().zip(&fx) {
        *y *= v;
    }
    planner.plan_fft_inverse(n).process(&mut fh);
    fh[..out_len].iter().map(|c| c.re / n as f64).collect()
}

/// Index of the largest `|values|`, ties (within a relative tolerance)
/// resolved toward the smallest `|lag|` where `lag = index - zero_index`.
pub fn peak_lag(values: &[f64], zero_index: usize) -> Option<isize> {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if values.is_empty() {
        return None;
    }
    let tol = max * 1e-9;
    let mut best: Option<isize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.abs() >= max - tol {
            let lag = i as isize - zero_index as isize;
            best = match best {
                None => Some(lag),
                Some(b) if lag.abs() < b.abs() || (lag.abs() == b.abs() && lag > b) => Some(lag),
                keep => keep,
            };
        }
    }
    best
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}
