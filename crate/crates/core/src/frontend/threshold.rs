//! Absolute threshold of hearing used as the 0 dB datum of the EPgram.

use serde::{Deserialize, Serialize};

// ISO 226:2003 threshold of hearing (free field, dB SPL) at the preferred
// one-third-octave frequencies.
const ISO226_FREQ_HZ: [f64; 29] = [
    20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0,
    500.0, 630.0, 800.0, 1000.0, 1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0,
    8000.0, 10000.0, 12500.0,
];
const ISO226_TF_DB: [f64; 29] = [
    78.5, 68.7, 59.5, 51.1, 44.0, 37.5, 31.5, 26.5, 22.1, 17.9, 14.4, 11.4, 8.6, 6.2, 4.4, 3.0,
    2.2, 2.4, 3.5, 1.7, -1.3, -4.2, -6.0, -5.4, -1.5, 6.0, 12.6, 13.9, 12.3,
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdCurve {
    /// Minimum audible field, log-frequency interpolation of the ISO 226 table.
    #[default]
    Iso226,
    /// The same threshold at every frequency.
    Flat { db_spl: f64 },
}

impl ThresholdCurve {
    pub fn at(&self, freq: f64) -> f64 {
        match *self {
            ThresholdCurve::Flat { db_spl } => db_spl,
            ThresholdCurve::Iso226 => iso226_threshold(freq),
        }
    }
}

fn iso226_threshold(freq: f64) -> f64 {
    let last = ISO226_FREQ_HZ.len() - 1;
    if freq <= ISO226_FREQ_HZ[0] {
        return ISO226_TF_DB[0];
    }
    if freq >= ISO226_FREQ_HZ[last] {
        return ISO226_TF_DB[last];
    }
    let hi = ISO226_FREQ_HZ.partition_point(|&f| f <= freq);
    let lo = hi - 1;
    let t = (freq / ISO226_FREQ_HZ[lo]).ln() / (ISO226_FREQ_HZ[hi] / ISO226_FREQ_HZ[lo]).ln();
    ISO226_TF_DB[lo] + t * (ISO226_TF_DB[hi] - ISO226_TF_DB[lo])
}
