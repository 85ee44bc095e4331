//! Split of audiometric loss into level-dependent (active) and
//! level-independent (passive) parts, and the resulting input-output loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the active/passive loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossModel {
    /// Largest loss the active (compressive) stage can contribute (dB).
    pub c_act_cap_db: f64,
    /// Below this input level the full active loss applies (dB SPL).
    pub knee_db: f64,
    /// At and above this input level the active loss has vanished (dB SPL).
    pub catch_db: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        Self {
            c_act_cap_db: 55.0,
            knee_db: 30.0,
            catch_db: 100.0,
        }
    }
}

impl LossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_act_cap_db >= 0.0 && self.knee_db < self.catch_db) {
            return Err(Error::Config(
                "loss model needs c_act_cap_db >= 0 and knee_db < catch_db".into(),
            ));
        }
        Ok(())
    }

    /// Fraction of the active loss still present at `level_db` (1 below the
    /// knee, 0 at the catch-up level, linear in between).
    pub fn ramp(&self, level_db: f64) -> f64 {
        ((self.catch_db - level_db) / (self.catch_db - self.knee_db)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlSplit {
    pub hl_act_db: f64,
    pub hl_pas_db: f64,
}

impl HlSplit {
    pub const NONE: HlSplit = HlSplit {
        hl_act_db: 0.0,
        hl_pas_db: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.hl_act_db + self.hl_pas_db
    }
}

pub fn split_hl(hl_total_db: f64, alpha: f64, c_act_cap_db: f64) -> Result<HlSplit> {
    if !(hl_total_db >= 0.0) {
        return Err(Error::Profile(format!(
            "total hearing loss must be >= 0, got {hl_total_db}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Profile(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let hl_act_db = (1.0 - alpha) * hl_total_db.min(c_act_cap_db);
    Ok(HlSplit {
        hl_act_db,
        hl_pas_db: hl_total_db - hl_act_db,
    })
}

/// Attenuation (dB) applied to a band whose input level is `level_db` SPL.
pub fn io_loss(level_db: f64, split: &HlSplit, model: &LossModel) -> f64 {
    split.hl_pas_db + split.hl_act_db * model.ramp(level_db)
}
