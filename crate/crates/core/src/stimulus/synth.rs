//! Synthetic test signals: a speech-like "word" and noises.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp::{rms, Biquad};

/// Digital RMS of the generated signals (-26 dBFS).
pub const DEFAULT_RMS: f64 = 0.050_118_723_362_727_23;

const FORMANTS_HZ: [f64; 3] = [500.0, 1500.0, 2500.0];
const FORMANT_BW_HZ: f64 = 200.0;
const SYLLABLE_RATE_HZ: f64 = 4.0;

fn scale_to(mut x: Vec<f64>, target: f64) -> Vec<f64> {
    let r = rms(&x);
    if r > 0.0 {
        x.iter_mut().for_each(|v| *v *= target / r);
    }
    x
}

/// Harmonic complex on `f0` shaped by three fixed formant peaks, amplitude
/// modulated at a syllabic rate, scaled to [`DEFAULT_RMS`].
pub fn synthetic_word(fs: f64, secs: f64, f0: f64) -> Vec<f64> {
    let n = (fs * secs).round() as usize;
    let top = (0.45 * fs).min(5000.0);
    let harmonics: Vec<(f64, f64)> = (1..)
        .map(|h| h as f64 * f0)
        .take_while(|&f| f < top)
        .map(|f| {
            let amp: f64 = FORMANTS_HZ
                .iter()
                .map(|&fm| 1.0 / (1.0 + ((f - fm) / FORMANT_BW_HZ).powi(2)))
                .sum();
            (f, amp)
        })
        .collect();
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let am = 0.5 * (1.0 - (2.0 * PI * SYLLABLE_RATE_HZ * t).cos());
            am * harmonics
                .iter()
                .map(|&(f, a)| a * (2.0 * PI * f * t).sin())
                .sum::<f64>()
        })
        .collect();
    scale_to(x, DEFAULT_RMS)
}

/// Uniform white noise in `[-1, 1)` from a seeded generator.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// White noise low-passed at 1 kHz (12 dB/octave), a rough long-term speech
/// spectrum, scaled to [`DEFAULT_RMS`].
pub fn speech_shaped_noise(n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let lp = Biquad::lowpass(fs, 1000.0);
    scale_to(lp.filter(&white_noise(n, seed)), DEFAULT_RMS)
}
