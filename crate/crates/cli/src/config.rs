//! The shared run configuration: one TOML file plus command-line overrides.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use gesi_core::metric::{GesiConfig, NormalizationMode};
use gesi_core::simulator::SimulatorConfig;
use gesi_core::stimulus::IrmConfig;
use serde::{Deserialize, Serialize};

use crate::Usage;

/// Everything a run depends on besides its input files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every randomised step.
    pub seed: u64,
    pub gesi: GesiConfig,
    pub simulator: SimulatorConfig,
    pub irm: IrmConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b but got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Configuration file with optional [gesi], [simulator] and [irm] tables
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<std::path::PathBuf>,
    /// Weight of the reference side in the similarity denominator
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Exponent of the audible-channel efficiency weight
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Harmonic number bounding the fundamental-frequency weight
    #[arg(long, global = true)]
    pub hmax: Option<f64>,
    /// Upper asymptote of the score
    #[arg(long, global = true)]
    pub imax: Option<f64>,
    /// Logistic slope and offset as a,b
    #[arg(long, global = true, value_name = "A,B", value_parser = parse_pair, allow_hyphen_values = true)]
    pub sigmoid: Option<(f64, f64)>,
    /// Maximum per-channel realignment in ms
    #[arg(long = "tma-ms", global = true)]
    pub tma_ms: Option<f64>,
    /// Normalisation of d: literal or channel_sum
    #[arg(long, global = true)]
    pub mode: Option<NormalizationMode>,
    /// Apply unity TMTF gains instead of the listener's
    #[arg(long = "no-tmtf-gains", global = true)]
    pub no_tmtf_gains: bool,
    /// Seed for noise generation and listener subsampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Overrides {
    /// The configuration file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let g = &mut cfg.gesi;
        if let Some(v) = self.rho {
            g.rho = v;
        }
        if let Some(v) = self.eta {
            g.eta = v;
        }
        if let Some(v) = self.hmax {
            g.h_max = v;
        }
        if let Some(v) = self.imax {
            g.sigmoid.i_max = v;
        }
        if let Some((a, b)) = self.sigmoid {
            g.sigmoid.a = a;
            g.sigmoid.b = b;
        }
        if let Some(v) = self.tma_ms {
            g.t_ma_ms = v;
        }
        if let Some(v) = self.mode {
            g.mode = v;
        }
        if self.no_tmtf_gains {
            g.tmtf_gains = false;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.gesi.validate()?;
        Ok(cfg)
    }
}
