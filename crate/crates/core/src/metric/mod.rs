//! The intelligibility metric: weights, similarity, the scalar `d`, the
//! logistic mapping to a score, and the end-to-end [`predict`] pipeline.

pub mod f0;
pub mod sigmoid;
pub mod similarity;
pub mod weights;

use serde::{Deserialize, Serialize};

use crate::alignment::{channel_align, global_align, AlignmentReport, DEFAULT_T_MA_MS};
use crate::error::{Error, Result};
use crate::frontend::{analyze_epgram, FrontendConfig};
use crate::modulation::{mod_envelopes, tmtf_gains, MfbConfig};
use crate::profiles::{ListenerProfile, Tmtf};

pub use f0::{estimate_f0, F0Config, F0Track, UNVOICED_EPSILON_HZ};
pub use sigmoid::{fit_sigmoid, sigmoid, FitOptions, SigmoidFit, SigmoidParams};
pub use similarity::{metric_d, similarity, NormalizationMode, SimilarityMatrix, SimilarityResult, DEFAULT_RHO};
pub use weights::{efficiency_weight, ssi_weight, EfficiencyWeights, WeightSet, Weighting, DEFAULT_ETA, DEFAULT_H_MAX};

/// Every tunable of the prediction pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GesiConfig {
    pub rho: f64,
    pub eta: f64,
    pub h_max: f64,
    pub t_ma_ms: f64,
    pub mode: NormalizationMode,
    pub weighting: Weighting,
    /// Per-band weights `w_j`; all 1 when absent.
    pub band_weights: Option<Vec<f64>>,
    /// Waveform cross-correlation alignment before analysis.
    pub global_align: bool,
    /// Apply the TMTF gains to the modulation bands; unity gains when off.
    pub tmtf_gains: bool,
    /// TMTF the reference side is scaled with.
    pub reference_tmtf: Tmtf,
    pub sigmoid: SigmoidParams,
    pub frontend: FrontendConfig,
    pub mfb: MfbConfig,
    pub f0: F0Config,
}

impl Default for GesiConfig {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            eta: DEFAULT_ETA,
            h_max: DEFAULT_H_MAX,
            t_ma_ms: DEFAULT_T_MA_MS,
            mode: NormalizationMode::default(),
            weighting: Weighting::default(),
            band_weights: None,
            global_align: true,
            tmtf_gains: true,
            reference_tmtf: Tmtf::normal_hearing(),
            sigmoid: SigmoidParams::default(),
            frontend: FrontendConfig::default(),
            mfb: MfbConfig::default(),
            f0: F0Config::default(),
        }
    }
}

impl GesiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho must be in [0, 1], got {}", self.rho)));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config("eta must be >= 0".into()));
        }
        if !(self.h_max > 0.0) {
            return Err(Error::Config("h_max must be > 0".into()));
        }
        if !(self.t_ma_ms >= 0.0) {
            return Err(Error::Config("t_ma_ms must be >= 0".into()));
        }
        if let Some(w) = &self.band_weights {
            if w.len() != self.mfb.n_bands() {
                return Err(Error::Config(format!(
                    "{} band weights for {} modulation bands",
                    w.len(),
                    self.mfb.n_bands()
                )));
            }
        }
        self.reference_tmtf.validate()?;
        self.sigmoid.validate()?;
        self.frontend.validate()?;
        self.mfb.validate()
    }

    pub fn band_weights(&self) -> Vec<f64> {
        self.band_weights
            .clone()
            .unwrap_or_else(|| vec![1.0; self.mfb.n_bands()])
    }

    pub fn from_toml(document: &str) -> Result<Self> {
        let cfg: GesiConfig = toml::from_str(document)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// One prediction as a flat, serialisable row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub reference: String,
    pub test: String,
    pub listener: String,
    pub d: f64,
    pub intelligibility: f64,
    /// `d` of the reference against itself under the same weights.
    pub d_self: f64,
    pub a: f64,
    pub b: f64,
    pub i_max: f64,
    pub rho: f64,
    pub eta: f64,
    pub h_max: f64,
    pub n_channels: usize,
    pub n_bands: usize,
    pub mode: String,
    pub weighting: String,
    pub global_lag_samples: isize,
    pub max_abs_channel_lag: isize,
    pub mean_abs_channel_lag: f64,
    pub n_audible: usize,
    pub inaudible: bool,
    pub zero_denominators: usize,
}

/// A record plus the intermediate results it was computed from.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub record: PredictionRecord,
    pub similarity: SimilarityResult,
    pub alignment: AlignmentReport,
    pub f0: F0Track,
}

/// Labels carried into the record; they do not affect the computation.
#[derive(Debug, Clone, Default)]
pub struct PredictionIds {
    pub reference: String,
    pub test: String,
    pub listener: String,
}

/// Full pipeline: align, analyse (reference as normal hearing, test as
/// `profile`), align channels, modulation filterbank, weights, `S_ij`, `d`,
/// and the score.
pub fn predict(
    reference: &[f64],
    test: &[f64],
    fs: f64,
    profile: &ListenerProfile,
    cfg: &GesiConfig,
    ids: PredictionIds,
) -> Result<Prediction> {
    cfg.validate()?;
    profile.validate()?;
    let (r, t, global_lag) = if cfg.global_align {
        let g = global_align(reference, test)?;
        (g.reference, g.test, g.lag_samples)
    } else {
        let n = reference.len().min(test.len());
        (reference[..n].to_vec(), test[..n].to_vec(), 0)
    };
    if r.is_empty() {
        return Err(Error::Signal("empty signal".into()));
    }

    let nh = ListenerProfile::normal_hearing();
    let ep_ref = analyze_epgram(&r, fs, &nh, &cfg.frontend)?;
    let ep_test_raw = analyze_epgram(&t, fs, profile, &cfg.frontend)?;
    let (ep_test, mut alignment) = channel_align(&ep_ref, &ep_test_raw, cfg.t_ma_ms)?;
    alignment.global_lag_samples = global_lag;

    let (g_ref, g_test) = if cfg.tmtf_gains {
        tmtf_gains(&cfg.mfb, &cfg.reference_tmtf, &profile.tmtf)?
    } else {
        let ones = vec![1.0; cfg.mfb.n_bands()];
        (ones.clone(), ones)
    };
    let m_ref = mod_envelopes(&ep_ref, &g_ref, &cfg.mfb)?;
    let m_test = mod_envelopes(&ep_test, &g_test, &cfg.mfb)?;

    let f0 = estimate_f0(&r, fs, &cfg.f0);
    let n_frames = ep_ref.n_frames();
    let weights = match cfg.weighting {
        Weighting::Gesi => {
            let ssi = ssi_weight(&f0.per_frame(n_frames, ep_ref.frame_shift_ms), &ep_ref.peak_freqs_hz, cfg.h_max)?;
            let eff = efficiency_weight(&ep_test, cfg.eta)?;
            WeightSet::new(ssi, eff, cfg.h_max, cfg.eta)?
        }
        Weighting::Unit => WeightSet::unit(ep_ref.n_channels(), n_frames),
    };

    let w_j = cfg.band_weights();
    let s = similarity(&m_ref, &m_test, &weights, cfg.rho)?;
    let d = metric_d(&s.s, &w_j, cfg.mode)?;
    let s_self = similarity(&m_ref, &m_ref, &weights, cfg.rho)?;
    let d_self = metric_d(&s_self.s, &w_j, cfg.mode)?;
    let intelligibility = sigmoid(d, &cfg.sigmoid);

    let record = PredictionRecord {
        reference: ids.reference,
        test: ids.test,
        listener: ids.listener,
        d,
        intelligibility,
        d_self,
        a: cfg.sigmoid.a,
        b: cfg.sigmoid.b,
        i_max: cfg.sigmoid.i_max,
        rho: cfg.rho,
        eta: cfg.eta,
        h_max: cfg.h_max,
        n_channels: ep_ref.n_channels(),
        n_bands: cfg.mfb.n_bands(),
        mode: cfg.mode.as_str().to_string(),
        weighting: match cfg.weighting {
            Weighting::Gesi => "gesi",
            Weighting::Unit => "unit",
        }
        .to_string(),
        global_lag_samples: global_lag,
        max_abs_channel_lag: alignment.max_abs_channel_lag(),
        mean_abs_channel_lag: alignment.mean_abs_channel_lag(),
        n_audible: weights.n_audible,
        inaudible: weights.inaudible,
        zero_denominators: s.zero_denominators,
    };
    Ok(Prediction {
        record,
        similarity: SimilarityResult {
            s: s.s,
            d,
            rho: cfg.rho,
            w_j,
            normalization_mode: cfg.mode,
            zero_denominators: s.zero_denominators,
        },
        alignment,
        f0,
    })
}
