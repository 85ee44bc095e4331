//! Listener and experiment configuration: audiograms, TMTF parameters,
//! compression health, and dataset manifests.
//!
//! Profiles are stored as TOML documents:
//!
//! ```toml
//! id = "OA7"          # optional
//! kind = "hl"         # optional, "nh" or "hl"; inferred from the audiogram if absent
//! alpha = 0.5         # optional; 1.0 for NH profiles, 0.5 for HL profiles
//!
//! [audiogram]
//! frequencies_hz = [125, 250, 500, 1000, 2000, 4000, 8000]
//! levels_db_hl = [10, 10, 10, 10, 15, 35, 50]
//!
//! [tmtf]              # optional; defaults to the normal-hearing reference TMTF
//! lps_db = -23.2
//! fc_hz = 51.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard audiometric frequencies used by the built-in profiles.
pub const AUDIOMETRIC_FREQS_HZ: [f64; 7] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

const PTA4_FREQS_HZ: [f64; 4] = [500.0, 1000.0, 2000.0, 4000.0];
const MIN_LEVEL_DB_HL: f64 = -20.0;
const MAX_LEVEL_DB_HL: f64 = 120.0;

/// Default compression health for hearing-impaired profiles.
pub const DEFAULT_HL_ALPHA: f64 = 0.5;

/// Pure-tone hearing thresholds for one ear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audiogram {
    frequencies_hz: Vec<f64>,
    levels_db_hl: Vec<f64>,
}

impl Audiogram {
    pub fn new(frequencies_hz: Vec<f64>, levels_db_hl: Vec<f64>) -> Result<Self> {
        if frequencies_hz.len() != levels_db_hl.len() {
            return Err(Error::Profile(format!(
                "audiogram has {} frequencies but {} levels",
                frequencies_hz.len(),
                levels_db_hl.len()
            )));
        }
        if frequencies_hz.len() < 2 {
            return Err(Error::Profile("audiogram needs at least 2 points".into()));
        }
        if frequencies_hz.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Profile(
                "audiogram frequencies must be positive and finite".into(),
            ));
        }
        if frequencies_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile(
                "audiogram frequencies must be strictly ascending".into(),
            ));
        }
        if let Some(bad) = levels_db_hl
            .iter()
            .find(|l| !(l.is_finite() && (MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL).contains(*l)))
        {
            return Err(Error::Profile(format!(
                "hearing level {bad} dB HL outside [{MIN_LEVEL_DB_HL}, {MAX_LEVEL_DB_HL}]"
            )));
        }
        Ok(Self {
            frequencies_hz,
            levels_db_hl,
        })
    }

    /// Same level at every standard audiometric frequency.
    pub fn flat(level_db_hl: f64) -> Result<Self> {
        Self::new(
            AUDIOMETRIC_FREQS_HZ.to_vec(),
            vec![level_db_hl; AUDIOMETRIC_FREQS_HZ.len()],
        )
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn levels_db_hl(&self) -> &[f64] {
        &self.levels_db_hl
    }

    /// Returns a copy with `delta_db` added at every frequency (clamped to the valid range).
    pub fn shifted(&self, delta_db: f64) -> Self {
        Self {
            frequencies_hz: self.frequencies_hz.clone(),
            levels_db_hl: self
                .levels_db_hl
                .iter()
                .map(|l| (l + delta_db).clamp(MIN_LEVEL_DB_HL, MAX_LEVEL_DB_HL))
                .collect(),
        }
    }

    fn covers(&self, freq: f64) -> bool {
        let lo = self.frequencies_hz[0];
        let hi = self.frequencies_hz[self.frequencies_hz.len() - 1];
        (lo..=hi).contains(&freq)
    }
}

/// Hearing level at `freq`, linearly interpolated on a log-frequency axis.
///
/// Outside the measured range the nearest endpoint level is returned.
pub fn interpolate_hl(audiogram: &Audiogram, freq: f64) -> f64 {
    let fs = &audiogram.frequencies_hz;
    let ls = &audiogram.levels_db_hl;
    if !(freq > fs[0]) {
        return ls[0];
    }
    if freq >= fs[fs.len() - 1] {
        return ls[ls.len() - 1];
    }
    // first knot strictly above freq; exists because freq < last knot
    let hi = fs.partition_point(|&f| f <= freq);
    let lo = hi - 1;
    if fs[lo] == freq {
        return ls[lo];
    }
    let t = (freq / fs[lo]).ln() / (fs[hi] / fs[lo]).ln();
    ls[lo] + t * (ls[hi] - ls[lo])
}

/// Four-frequency pure-tone average (500, 1000, 2000, 4000 Hz).
pub fn pta4(audiogram: &Audiogram) -> Result<f64> {
    if let Some(f) = PTA4_FREQS_HZ.iter().find(|f| !audiogram.covers(**f)) {
        return Err(Error::Profile(format!(
            "audiogram does not cover {f} Hz required for PTA4"
        )));
    }
    Ok(PTA4_FREQS_HZ
        .iter()
        .map(|&f| interpolate_hl(audiogram, f))
        .sum::<f64>()
        / 4.0)
}

/// Temporal modulation transfer function modelled as a first-order low-pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tmtf {
    /// Peak sensitivity at low modulation frequencies (dB).
    pub lps_db: f64,
    /// Low-pass cutoff (Hz).
    pub fc_hz: f64,
}

impl Tmtf {
    pub fn new(lps_db: f64, fc_hz: f64) -> Result<Self> {
        let t = Self { lps_db, fc_hz };
        t.validate()?;
        Ok(t)
    }

    /// Reference TMTF for normal hearing.
    pub const fn normal_hearing() -> Self {
        Self {
            lps_db: -23.2,
            fc_hz: 51.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lps_db.is_finite() {
            return Err(Error::Profile("TMTF L_ps must be finite".into()));
        }
        if !(self.fc_hz.is_finite() && self.fc_hz > 0.0) {
            return Err(Error::Profile(format!(
                "TMTF cutoff must be positive, got {}",
                self.fc_hz
            )));
        }
        Ok(())
    }
}

impl Default for Tmtf {
    fn default() -> Self {
        Self::normal_hearing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Nh,
    Hl,
}

/// Better-ear description of one listener.
#[derive(Debug, Clone, PartialEq)]
pub struct ListenerProfile {
    pub id: Option<String>,
    pub kind: ProfileKind,
    pub audiogram: Audiogram,
    pub tmtf: Tmtf,
    /// Compression health: 1 = healthy, 0 = fully damaged.
    pub alpha: f64,
}

impl ListenerProfile {
    pub fn new(audiogram: Audiogram, tmtf: Tmtf, alpha: f64) -> Result<Self> {
        let kind = infer_kind(&audiogram);
        let p = Self {
            id: None,
            kind,
            audiogram,
            tmtf,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    /// 0 dB HL everywhere, healthy compression, reference TMTF.
    pub fn normal_hearing() -> Self {
        Self {
            id: Some("NH".into()),
            kind: ProfileKind::Nh,
            audiogram: Audiogram::flat(0.0).expect("flat 0 dB audiogram is valid"),
            tmtf: Tmtf::normal_hearing(),
            alpha: 1.0,
        }
    }

    /// A mild sloping age-related loss with a better-ear PTA4 of 17.5 dB.
    pub fn oa7_example() -> Self {
        Self {
            id: Some("OA7".into()),
            kind: ProfileKind::Hl,
            audiogram: Audiogram::new(
                AUDIOMETRIC_FREQS_HZ.to_vec(),
                vec![10.0, 10.0, 10.0, 10.0, 15.0, 35.0, 50.0],
            )
            .expect("preset audiogram is valid"),
            tmtf: Tmtf {
                lps_db: -23.2,
                fc_hz: 51.0,
            },
            alpha: DEFAULT_HL_ALPHA,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Profile(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        self.tmtf.validate()
    }

    pub fn pta4(&self) -> Result<f64> {
        pta4(&self.audiogram)
    }

    pub fn to_toml(&self) -> Result<String> {
        let doc = ProfileDocument {
            id: self.id.clone(),
            kind: Some(self.kind),
            alpha: Some(self.alpha),
            audiogram: AudiogramDocument {
                frequencies_hz: self.audiogram.frequencies_hz.clone(),
                levels_db_hl: self.audiogram.levels_db_hl.clone(),
            },
            tmtf: Some(self.tmtf),
        };
        Ok(toml::to_string(&doc)?)
    }
}

fn infer_kind(audiogram: &Audiogram) -> ProfileKind {
    if audiogram.levels_db_hl.iter().all(|&l| l <= 0.0) {
        ProfileKind::Nh
    } else {
        ProfileKind::Hl
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AudiogramDocument {
    frequencies_hz: Vec<f64>,
    levels_db_hl: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<ProfileKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    audiogram: AudiogramDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    tmtf: Option<Tmtf>,
}

/// Parses and validates a TOML profile document, applying defaults.
pub fn load_profile(document: &str) -> Result<ListenerProfile> {
    let doc: ProfileDocument =
        toml::from_str(document).map_err(|e| Error::Profile(e.message().to_string()))?;
    let audiogram = Audiogram::new(doc.audiogram.frequencies_hz, doc.audiogram.levels_db_hl)?;
    let kind = doc.kind.unwrap_or_else(|| infer_kind(&audiogram));
    let alpha = doc.alpha.unwrap_or(match kind {
        ProfileKind::Nh => 1.0,
        ProfileKind::Hl => DEFAULT_HL_ALPHA,
    });
    let tmtf = doc.tmtf.unwrap_or_default();
    let profile = ListenerProfile {
        id: doc.id,
        kind,
        audiogram,
        tmtf,
        alpha,
    };
    profile.validate()?;
    Ok(profile)
}

pub fn load_profile_file(path: &Path) -> Result<ListenerProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut p = load_profile(&text)?;
    if p.id.is_none() {
        p.id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(p)
}

/// One row of a prediction manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    #[serde(rename = "ref")]
    pub reference: PathBuf,
    pub test: PathBuf,
    pub condition: String,
    pub snr_db: f64,
    pub listener: String,
    #[serde(default)]
    pub si: Option<f64>,
}

impl ManifestRecord {
    fn validate(&self, row: usize) -> Result<()> {
        if self.reference.as_os_str().is_empty() || self.test.as_os_str().is_empty() {
            return Err(Error::Data(format!("manifest row {row}: empty path")));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Data(format!("manifest row {row}: SNR is not finite")));
        }
        if let Some(si) = self.si {
            if !(0.0..=100.0).contains(&si) {
                return Err(Error::Data(format!(
                    "manifest row {row}: SI {si} outside [0, 100]"
                )));
            }
        }
        Ok(())
    }
}

/// A comma-separated table with header `ref,test,condition,snr_db,listener[,si]`.
///
/// Relative paths are resolved against `base_dir`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn from_reader<R: std::io::Read>(reader: R, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut records = Vec::new();
        for (i, row) in rdr.deserialize::<ManifestRecord>().enumerate() {
            let rec = row?;
            rec.validate(i + 1)?;
            records.push(rec);
        }
        Ok(Self {
            base_dir: base_dir.into(),
            records,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_reader(file, base)
    }

    pub fn write<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<manifest>", e))?;
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nh_profile_defaults_alpha_to_one() {
        let doc = r#"
            [audiogram]
            frequencies_hz = [250, 500, 1000, 2000, 4000, 8000]
            levels_db_hl = [0, 0, 0, 0, 0, 0]
        "#;
        let p = load_profile(doc).unwrap();
        assert_eq!(p.kind, ProfileKind::Nh);
        assert_eq!(p.alpha, 1.0);
        assert_eq!(p.pta4().unwrap(), 0.0);
        assert_eq!(p.tmtf, Tmtf::normal_hearing());
    }

    #[test]
    fn hl_profile_defaults_alpha_to_half() {
        let doc = r#"
            [audiogram]
            frequencies_hz = [125, 250, 500, 1000, 2000, 4000, 8000]
            levels_db_hl = [10, 10, 10, 10, 15, 35, 50]
            [tmtf]
            lps_db = -23.2
            fc_hz = 51
        "#;
        let p = load_profile(doc).unwrap();
        assert_eq!(p.kind, ProfileKind::Hl);
        assert_eq!(p.alpha, 0.5);
        assert_eq!(p.pta4().unwrap(), 17.5);
        assert_eq!(p.tmtf, Tmtf::new(-23.2, 51.0).unwrap());
    }

    #[test]
    fn oa7_preset_pta4() {
        assert_eq!(ListenerProfile::oa7_example().pta4().unwrap(), 17.5);
    }

    #[test]
    fn rejects_non_ascending_frequencies() {
        let doc = r#"
            [audiogram]
            frequencies_hz = [1000, 500, 2000, 4000]
            levels_db_hl = [0, 0, 0, 0]
        "#;
        let err = load_profile(doc).unwrap_err();
        assert!(err.to_string().contains("ascending"), "{err}");
    }

    #[test]
    fn rejects_alpha_out_of_range() {
        let doc = r#"
            alpha = 1.5
            [audiogram]
            frequencies_hz = [500, 4000]
            levels_db_hl = [0, 0]
        "#;
        assert!(load_profile(doc).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_levels() {
        let doc = r#"
            colour = "blue"
            [audiogram]
            frequencies_hz = [500, 4000]
            levels_db_hl = [0, 0]
        "#;
        assert!(load_profile(doc).is_err());
        assert!(Audiogram::new(vec![500.0, 1000.0], vec![0.0, 130.0]).is_err());
        assert!(Audiogram::new(vec![500.0], vec![0.0]).is_err());
        assert!(Tmtf::new(-20.0, 0.0).is_err());
    }

    #[test]
    fn pta4_arithmetic() {
        let a = Audiogram::new(
            vec![500.0, 1000.0, 2000.0, 4000.0],
            vec![10.0, 15.0, 20.0, 25.0],
        )
        .unwrap();
        assert_eq!(pta4(&a).unwrap(), 17.5);
        let narrow = Audiogram::new(vec![500.0, 2000.0], vec![10.0, 20.0]).unwrap();
        assert!(pta4(&narrow).is_err());
    }

    #[test]
    fn interpolation_cases() {
        let a = Audiogram::new(vec![125.0, 1000.0, 2000.0], vec![5.0, 20.0, 40.0]).unwrap();
        assert_eq!(interpolate_hl(&a, 1000.0), 20.0);
        assert_eq!(interpolate_hl(&a, 125.0), 5.0);
        assert!((interpolate_hl(&a, 1000.0 * 2f64.sqrt()) - 30.0).abs() < 1e-12);
        assert_eq!(interpolate_hl(&a, 100.0), 5.0);
        assert_eq!(interpolate_hl(&a, 16000.0), 40.0);
    }

    #[test]
    fn manifest_parses_optional_si() {
        let text = "ref,test,condition,snr_db,listener,si\n\
                    a.wav,b.wav,Unpro,-6,L1,40\n\
                    a.wav,c.wav,IRM,0,L1,\n";
        let m = Manifest::from_reader(text.as_bytes(), "/data").unwrap();
        assert_eq!(m.records.len(), 2);
        assert_eq!(m.records[0].si, Some(40.0));
        assert_eq!(m.records[1].si, None);
        assert_eq!(m.resolve(&m.records[0].test), PathBuf::from("/data/b.wav"));

        let bad = "ref,test,condition,snr_db,listener,si\na.wav,b.wav,Unpro,0,L1,140\n";
        assert!(Manifest::from_reader(bad.as_bytes(), ".").is_err());
    }

    fn arb_profile() -> impl Strategy<Value = ListenerProfile> {
        (
            prop::collection::vec((1.0f64..2.0, -20.0f64..120.0), 2..9),
            -40.0f64..0.0,
            1.0f64..200.0,
            0.0f64..=1.0,
        )
            .prop_map(|(pts, lps, fc, alpha)| {
                let mut f = 100.0;
                let (freqs, levels): (Vec<_>, Vec<_>) = pts
                    .into_iter()
                    .map(|(step, l)| {
                        f *= step + 0.01;
                        (f, l)
                    })
                    .unzip();
                let mut p = ListenerProfile::new(
                    Audiogram::new(freqs, levels).unwrap(),
                    Tmtf::new(lps, fc).unwrap(),
                    alpha,
                )
                .unwrap();
                p.id = Some("x".into());
                p
            })
    }

    proptest! {
        #[test]
        fn profile_toml_round_trip(p in arb_profile()) {
            let text = p.to_toml().unwrap();
            prop_assert_eq!(load_profile(&text).unwrap(), p);
        }

        #[test]
        fn pta4_is_mean_and_permutation_invariant(levels in prop::array::uniform4(-20.0f64..120.0)) {
            let mean = levels.iter().sum::<f64>() / 4.0;
            let a = Audiogram::new(PTA4_FREQS_HZ.to_vec(), levels.to_vec()).unwrap();
            prop_assert!((pta4(&a).unwrap() - mean).abs() < 1e-12);
            let mut rev = levels;
            rev.reverse();
            let b = Audiogram::new(PTA4_FREQS_HZ.to_vec(), rev.to_vec()).unwrap();
            prop_assert!((pta4(&b).unwrap() - mean).abs() < 1e-12);
        }

        #[test]
        fn interpolation_monotone_between_knots(l0 in -20.0f64..120.0, l1 in -20.0f64..120.0, t in 0.0f64..1.0) {
            let a = Audiogram::new(vec![500.0, 1000.0, 2000.0], vec![l0, l1, l1]).unwrap();
            let f = 500.0 * 2f64.powf(t);
            let v = interpolate_hl(&a, f);
            let (lo, hi) = if l0 <= l1 { (l0, l1) } else { (l1, l0) };
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            let v2 = interpolate_hl(&a, f * 1.001);
            if l1 >= l0 { prop_assert!(v2 >= v - 1e-12) } else { prop_assert!(v2 <= v + 1e-12) }
        }
    }
}
