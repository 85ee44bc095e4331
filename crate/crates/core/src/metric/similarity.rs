//! Weighted, asymmetric cosine similarity between reference and test
//! modulation envelopes, and its reduction to the scalar `d`.

use serde::{Deserialize, Serialize};

use super::weights::WeightSet;
use crate::error::{Error, Result};
use crate::modulation::ModulationEnvelopes;

pub const DEFAULT_RHO: f64 = 0.52;

/// How `S_ij` is averaged into `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// `d = (1/(M N)) Σ_i Σ_j w_j S_ij`
    Literal,
    /// `d = (1/M) Σ_j w_j Σ_i S_ij`
    #[default]
    ChannelSum,
}

impl NormalizationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormalizationMode::Literal => "literal",
            NormalizationMode::ChannelSum => "channel_sum",
        }
    }
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(NormalizationMode::Literal),
            "channel_sum" => Ok(NormalizationMode::ChannelSum),
            other => Err(Error::Config(format!(
                "unknown normalization mode {other:?} (expected literal or channel_sum)"
            ))),
        }
    }
}

/// `s[channel][band]` plus the number of cells whose denominator was zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub s: Vec<Vec<f64>>,
    pub zero_denominators: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityResult {
    pub s: Vec<Vec<f64>>,
    pub d: f64,
    pub rho: f64,
    pub w_j: Vec<f64>,
    pub normalization_mode: NormalizationMode,
    pub zero_denominators: usize,
}

/// Cell-wise `S_ij`. Cells where either envelope has zero energy are 0.
pub fn similarity(
    m_ref: &ModulationEnvelopes,
    m_test: &ModulationEnvelopes,
    w: &WeightSet,
    rho: f64,
) -> Result<SimilarityMatrix> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("rho must be in [0, 1], got {rho}")));
    }
    let (n, m, t) = (m_ref.n_channels(), m_ref.n_bands(), m_ref.n_frames());
    if (m_test.n_channels(), m_test.n_bands(), m_test.n_frames()) != (n, m, t) {
        return Err(Error::Shape("reference and test modulation envelopes differ in shape".into()));
    }
    if w.n_channels() != n || w.n_frames() != t {
        return Err(Error::Shape(format!(
            "weights {}x{} for envelopes {n}x{t}",
            w.n_channels(),
            w.n_frames()
        )));
    }
    let mut zero = 0;
    let s = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let (r, x) = (&m_ref.values[i][j], &m_test.values[i][j]);
                    let er: f64 = r.iter().map(|v| v * v).sum();
                    let et: f64 = x.iter().map(|v| v * v).sum();
                    if er <= 0.0 || et <= 0.0 {
                        zero += 1;
                        return 0.0;
                    }
                    let num: f64 = (0..t).map(|k| w.combined(i, k) * r[k] * x[k]).sum();
                    num / (er.powf(rho) * et.powf(1.0 - rho))
                })
                .collect()
        })
        .collect();
    Ok(SimilarityMatrix {
        s,
        zero_denominators: zero,
    })
}

/// Reduces `s[channel][band]` to `d` with band weights `w_j`.
pub fn metric_d(s: &[Vec<f64>], w_j: &[f64], mode: NormalizationMode) -> Result<f64> {
    let n = s.len();
    let m = w_j.len();
    if n == 0 || m == 0 {
        return Err(Error::Shape("empty similarity matrix".into()));
    }
    if s.iter().any(|row| row.len() != m) {
        return Err(Error::Shape(format!("similarity rows must have {m} bands")));
    }
    let total: f64 = s
        .iter()
        .map(|row| row.iter().zip(w_j).map(|(v, w)| v * w).sum::<f64>())
        .sum();
    let d = match mode {
        NormalizationMode::Literal => total / (m * n) as f64,
        NormalizationMode::ChannelSum => total / m as f64,
    };
    if !d.is_finite() {
        return Err(Error::Numeric("metric d is not finite".into()));
    }
    Ok(d)
}
