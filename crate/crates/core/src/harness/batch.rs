//! Manifest-driven batch prediction.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::read_wav;
use crate::error::{Error, Result};
use crate::metric::{predict, GesiConfig, PredictionIds, PredictionRecord};
use crate::profiles::{load_profile_file, ListenerProfile, Manifest, ManifestRecord};

/// Listener id that resolves to the normal-hearing profile when no profile
/// file of that name was loaded.
pub const NH_LISTENER: &str = "nh";

#[derive(Debug, Clone, Default)]
pub struct ProfileSet {
    profiles: BTreeMap<String, ListenerProfile>,
}

impl ProfileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, profile: ListenerProfile) {
        self.profiles.insert(id.into(), profile);
    }

    /// Loads every `*.toml` in `dir`, keyed by file stem.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut set = Self::new();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        for p in paths {
            let prof = load_profile_file(&p)?;
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            set.insert(id, prof);
        }
        Ok(set)
    }

    pub fn get(&self, listener: &str) -> Result<ListenerProfile> {
        if let Some(p) = self.profiles.get(listener) {
            return Ok(p.clone());
        }
        if listener.eq_ignore_ascii_case(NH_LISTENER) {
            return Ok(ListenerProfile::normal_hearing());
        }
        Err(Error::Profile(format!("no profile for listener {listener:?}")))
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchOptions {
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

/// Outcome of one manifest row: a record, or the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub index: usize,
    pub input: ManifestRecord,
    pub outcome: std::result::Result<PredictionRecord, String>,
}

impl BatchRow {
    pub fn record(&self) -> Option<&PredictionRecord> {
        self.outcome.as_ref().ok()
    }
}

fn predict_row(manifest: &Manifest, row: &ManifestRecord, profiles: &ProfileSet, cfg: &GesiConfig) -> Result<PredictionRecord> {
    let profile = profiles.get(&row.listener)?;
    let r = read_wav(&manifest.resolve(&row.reference))?;
    let t = read_wav(&manifest.resolve(&row.test))?;
    if r.sample_rate != t.sample_rate {
        return Err(Error::Signal(format!(
            "reference at {} Hz, test at {} Hz",
            r.sample_rate, t.sample_rate
        )));
    }
    let ids = PredictionIds {
        reference: row.reference.display().to_string(),
        test: row.test.display().to_string(),
        listener: row.listener.clone(),
    };
    predict(&r.samples, &t.samples, r.fs(), &profile, cfg, ids).map(|p| p.record)
}

/// Predicts every manifest row on a bounded pool. Rows keep manifest order;
/// a failing row is reported in place and the others still run.
pub fn batch_predict(
    manifest: &Manifest,
    profiles: &ProfileSet,
    cfg: &GesiConfig,
    opts: &BatchOptions,
) -> Result<Vec<BatchRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        manifest
            .records
            .par_iter()
            .enumerate()
            .map(|(index, row)| BatchRow {
                index,
                input: row.clone(),
                outcome: predict_row(manifest, row, profiles, cfg).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

#[derive(Serialize)]
struct OutRow<'a> {
    row: usize,
    #[serde(rename = "ref")]
    reference: String,
    test: String,
    condition: &'a str,
    snr_db: f64,
    listener: &'a str,
    si: Option<f64>,
    d: Option<f64>,
    intelligibility: Option<f64>,
    d_self: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    i_max: Option<f64>,
    rho: Option<f64>,
    eta: Option<f64>,
    h_max: Option<f64>,
    n_channels: Option<usize>,
    n_bands: Option<usize>,
    mode: Option<&'a str>,
    weighting: Option<&'a str>,
    global_lag_samples: Option<isize>,
    max_abs_channel_lag: Option<isize>,
    mean_abs_channel_lag: Option<f64>,
    n_audible: Option<usize>,
    inaudible: Option<bool>,
    zero_denominators: Option<usize>,
    error: Option<&'a str>,
}

/// Prefix of the lines that carry the resolved configuration.
pub const CONFIG_PREFIX: &str = "# config: ";

/// Writes `lines` of a configuration document as `# config: ` comments.
pub fn write_config_header<W: Write>(mut w: W, config_toml: &str) -> Result<()> {
    for line in config_toml.lines() {
        writeln!(w, "{CONFIG_PREFIX}{line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Prediction table as CSV, preceded by the configuration as comment lines.
pub fn write_predictions<W: Write>(mut w: W, rows: &[BatchRow], config_toml: Option<&str>) -> Result<()> {
    if let Some(c) = config_toml {
        write_config_header(&mut w, c)?;
    }
    let mut csv = csv::Writer::from_writer(w);
    if rows.is_empty() {
        csv.write_record(["row", "ref", "test", "condition", "snr_db", "listener", "si", "d", "intelligibility", "error"])?;
    }
    for r in rows {
        let rec = r.record();
        csv.serialize(OutRow {
            row: r.index,
            reference: r.input.reference.display().to_string(),
            test: r.input.test.display().to_string(),
            condition: &r.input.condition,
            snr_db: r.input.snr_db,
            listener: &r.input.listener,
            si: r.input.si,
            d: rec.map(|x| x.d),
            intelligibility: rec.map(|x| x.intelligibility),
            d_self: rec.map(|x| x.d_self),
            a: rec.map(|x| x.a),
            b: rec.map(|x| x.b),
            i_max: rec.map(|x| x.i_max),
            rho: rec.map(|x| x.rho),
            eta: rec.map(|x| x.eta),
            h_max: rec.map(|x| x.h_max),
            n_channels: rec.map(|x| x.n_channels),
            n_bands: rec.map(|x| x.n_bands),
            mode: rec.map(|x| x.mode.as_str()),
            weighting: rec.map(|x| x.weighting.as_str()),
            global_lag_samples: rec.map(|x| x.global_lag_samples),
            max_abs_channel_lag: rec.map(|x| x.max_abs_channel_lag),
            mean_abs_channel_lag: rec.map(|x| x.mean_abs_channel_lag),
            n_audible: rec.map(|x| x.n_audible),
            inaudible: rec.map(|x| x.inaudible),
            zero_denominators: rec.map(|x| x.zero_denominators),
            error: r.outcome.as_ref().err().map(String::as_str),
        })?;
    }
    csv.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// The columns of a prediction table that calibration and reporting use.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TableRow {
    pub listener: String,
    pub condition: String,
    pub snr_db: f64,
    #[serde(default)]
    pub si: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub intelligibility: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
}

impl TableRow {
    pub fn failed(&self) -> bool {
        self.error.as_deref().is_some_and(|e| !e.is_empty()) || self.d.is_none()
    }
}

/// Reads a table written by [`write_predictions`], skipping comment lines.
pub fn read_predictions<R: std::io::Read>(reader: R) -> Result<Vec<TableRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Recovers the configuration document from the `# config: ` lines.
pub fn read_config_header(text: &str) -> String {
    text.lines()
        .filter_map(|l| l.strip_prefix(CONFIG_PREFIX).or_else(|| (l == CONFIG_PREFIX.trim_end()).then_some("")))
        .map(|l| format!("{l}\n"))
        .collect()
}
