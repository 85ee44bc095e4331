//! ERB-scale gammatone filterbank.
//!
//! Each channel is a fourth-order gammatone realised as four cascaded
//! complex one-pole sections with pole `a * exp(j w_c)`. The real part of the
//! complex output (times two) is the band signal; the peak gain at the centre
//! frequency is one.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

/// Glasberg & Moore equivalent rectangular bandwidth (Hz).
pub fn erb_hz(f: f64) -> f64 {
    24.7 * (4.37 * f / 1000.0 + 1.0)
}

/// ERB-number (Cams) of frequency `f`.
pub fn erb_number(f: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * f).log10()
}

pub fn erb_number_to_hz(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) / 0.00437
}

/// `n` frequencies equally spaced on the ERB-number scale, inclusive of both ends.
pub fn erb_space(f_lo: f64, f_hi: f64, n: usize) -> Vec<f64> {
    let (e_lo, e_hi) = (erb_number(f_lo), erb_number(f_hi));
    let step = (e_hi - e_lo) / (n - 1) as f64;
    (0..n)
        .map(|i| erb_number_to_hz(e_lo + step * i as f64))
        .collect()
}

const ORDER: i32 = 4;
const BANDWIDTH_FACTOR: f64 = 1.019;

#[derive(Debug, Clone, Copy)]
pub struct GammatoneFilter {
    pub center_hz: f64,
    fs: f64,
    pole: Complex64,
    gain: f64,
}

impl GammatoneFilter {
    pub fn new(center_hz: f64, fs: f64) -> Self {
        let b = BANDWIDTH_FACTOR * erb_hz(center_hz);
        let radius = (-2.0 * PI * b / fs).exp();
        let w = 2.0 * PI * center_hz / fs;
        Self {
            center_hz,
            fs,
            pole: Complex64::from_polar(radius, w),
            gain: 1.0 - radius,
        }
    }

    /// Group delay at the centre frequency in samples.
    pub fn group_delay_samples(&self) -> f64 {
        let a = self.pole.norm();
        ORDER as f64 * a / (1.0 - a)
    }

    /// Transfer function of the real-valued band output at frequency `f`.
    pub fn response(&self, f: f64) -> Complex64 {
        let complex_part = |w: f64| {
            let z1 = Complex64::from_polar(1.0, -w);
            (self.gain / (1.0 - self.pole * z1)).powi(ORDER)
        };
        let w = 2.0 * PI * f / self.fs;
        complex_part(w) + complex_part(-w).conj()
    }

    pub fn magnitude(&self, f: f64) -> f64 {
        self.response(f).norm()
    }

    /// Real band signal for `input`, starting from zero state.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len());
        self.filter_into(input.iter().copied(), &mut out);
        out
    }

    pub fn filter_into(&self, input: impl Iterator<Item = f64>, out: &mut Vec<f64>) {
        let mut s = [Complex64::new(0.0, 0.0); ORDER as usize];
        let (p, g) = (self.pole, self.gain);
        for x in input {
            let mut v = Complex64::new(x, 0.0);
            for st in s.iter_mut() {
                *st = g * v + p * *st;
                v = *st;
            }
            out.push(2.0 * v.re);
        }
    }

    /// Forward-backward (zero-phase) filtering; magnitude response `|H|^2`.
    pub fn filter_zero_phase(&self, input: &[f64]) -> Vec<f64> {
        let forward = self.filter(input);
        let mut back = Vec::with_capacity(input.len());
        self.filter_into(forward.iter().rev().copied(), &mut back);
        back.reverse();
        back
    }
}
