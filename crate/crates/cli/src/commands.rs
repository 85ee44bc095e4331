//! One function per subcommand.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use gesi_core::audio::{read_wav, write_wav, Audio};
use gesi_core::harness::batch::{read_config_header, write_config_header};
use gesi_core::harness::evaluate::{fit_and_evaluate, repeated_subsampling, Observation, SubsamplingOptions};
use gesi_core::harness::{batch_predict, read_predictions, write_predictions, write_report, BatchOptions, ProfileSet, ReportRow};
use gesi_core::metric::{predict, FitOptions, PredictionIds};
use gesi_core::profiles::{load_profile_file, ListenerProfile, Manifest};
use gesi_core::simulator::synthesize_hl_with_gains;
use gesi_core::stimulus::synth::speech_shaped_noise;
use gesi_core::stimulus::{apply_rir, ideal_ratio_mask, measured_snr_db, mix_at_snr};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Usage;

/// `--profile` value: a profile TOML file or `nh` for normal hearing.
#[derive(Debug, Clone, Args)]
pub struct ProfileArg {
    /// Listener profile TOML, or "nh" for normal hearing
    #[arg(long, default_value = "nh")]
    pub profile: String,
    /// Override the profile's outer-hair-cell health in [0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ProfileArg {
    fn load(&self) -> Result<(String, ListenerProfile)> {
        let (label, p) = if self.profile.eq_ignore_ascii_case("nh") {
            ("nh".to_string(), ListenerProfile::normal_hearing())
        } else {
            let path = Path::new(&self.profile);
            let p = load_profile_file(path)?;
            let label = p.id.clone().unwrap_or_else(|| self.profile.clone());
            (label, p)
        };
        let p = match self.alpha {
            Some(a) => p.with_alpha(a)?,
            None => p,
        };
        Ok((label, p))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// A file when `out` is given, stdout otherwise.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Writes `<out>.toml` next to an audio output, since WAV carries no comments.
fn write_sidecar<T: Serialize>(out: &Path, cfg: &RunConfig, extra: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Sidecar<'a, T> {
        run: &'a T,
        #[serde(flatten)]
        config: &'a RunConfig,
    }
    let mut path = out.as_os_str().to_owned();
    path.push(".toml");
    let text = toml::to_string(&Sidecar { run: extra, config: cfg })?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", PathBuf::from(&path).display()))?;
    Ok(())
}

fn same_rate(a: &Audio, b: &Audio, what: &str) -> Result<()> {
    if a.sample_rate != b.sample_rate {
        return Err(gesi_core::Error::Signal(format!(
            "{what}: sample rates differ ({} Hz vs {} Hz)",
            a.sample_rate, b.sample_rate
        ))
        .into());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Clean reference WAV
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Processed or noisy test WAV
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub profile: ProfileArg,
    /// Output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn predict_cmd(args: &PredictArgs, cfg: &RunConfig) -> Result<()> {
    let (listener, profile) = args.profile.load()?;
    let r = read_wav(&args.reference)?;
    let t = read_wav(&args.test)?;
    same_rate(&r, &t, "predict")?;
    let ids = PredictionIds {
        reference: args.reference.display().to_string(),
        test: args.test.display().to_string(),
        listener,
    };
    let p = predict(&r.samples, &t.samples, r.fs(), &profile, &cfg.gesi, ids)?;
    let mut w = sink(args.out.as_deref())?;
    write_config_header(&mut w, &cfg.to_toml()?)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.serialize(&p.record)?;
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// CSV with columns ref, test, condition, snr_db, listener and optional si
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of listener profile TOML files, named by listener id
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Worker threads; 0 picks one per core
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output CSV; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn batch_cmd(args: &BatchArgs, cfg: &RunConfig) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let profiles = match &args.profiles {
        Some(dir) => ProfileSet::load_dir(dir)?,
        None => ProfileSet::new(),
    };
    let rows = batch_predict(&manifest, &profiles, &cfg.gesi, &BatchOptions { threads: args.threads })?;
    for r in &rows {
        if let Err(e) = &r.outcome {
            eprintln!("row {}: {e}", r.index);
        }
    }
    write_predictions(sink(args.out.as_deref())?, &rows, Some(&cfg.to_toml()?))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Prediction table from `batch`, with measured scores in the si column
    #[arg(long)]
    pub predictions: PathBuf,
    /// Calibrate only on this condition
    #[arg(long = "train-condition")]
    pub train_condition: Option<String>,
    /// Calibrate only on these listeners (comma separated)
    #[arg(long = "train-listeners", value_delimiter = ',')]
    pub train_listeners: Vec<String>,
    /// Draw this many calibration listeners at random, `--repeats` times
    #[arg(long = "n-train", conflicts_with = "train_listeners")]
    pub n_train: Option<usize>,
    /// Repetitions of the random listener draw
    #[arg(long, default_value_t = 10, requires = "n_train")]
    pub repeats: usize,
    /// Output JSON; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn observations(path: &Path) -> Result<(Vec<Observation>, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = read_predictions(text.as_bytes())?;
    let obs: Vec<Observation> = rows
        .into_iter()
        .filter(|r| !r.failed())
        .filter_map(|r| {
            Some(Observation {
                d: r.d?,
                si: r.si?,
                listener: r.listener,
                condition: r.condition,
                snr_db: r.snr_db,
            })
        })
        .collect();
    if obs.is_empty() {
        return Err(gesi_core::Error::Data(format!("{}: no rows with both d and si", path.display())).into());
    }
    Ok((obs, read_config_header(&text)))
}

pub fn fit_cmd(args: &FitArgs, cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Output<T> {
        /// Configuration of the run that produced the predictions.
        predictions_config: String,
        config: String,
        fit: T,
    }
    let (obs, predictions_config) = observations(&args.predictions)?;
    let i_max = cfg.gesi.sigmoid.i_max;
    let opts = FitOptions::default();
    let config = cfg.to_toml()?;
    let mut w = sink(args.out.as_deref())?;
    if let Some(n) = args.n_train {
        let sub = SubsamplingOptions {
            n_train_listeners: n,
            repeats: args.repeats,
            seed: cfg.seed,
            train_condition: args.train_condition.clone(),
        };
        let fit = repeated_subsampling(&obs, &sub, i_max, &opts)?;
        serde_json::to_writer_pretty(&mut w, &Output { predictions_config, config, fit })?;
    } else {
        let train: Vec<Observation> = obs
            .iter()
            .filter(|o| args.train_condition.as_ref().is_none_or(|c| &o.condition == c))
            .filter(|o| args.train_listeners.is_empty() || args.train_listeners.contains(&o.listener))
            .cloned()
            .collect();
        if train.is_empty() {
            bail!(Usage("no calibration rows match the training selection".into()));
        }
        let fit = fit_and_evaluate(&train, &obs, i_max, &opts)?;
        serde_json::to_writer_pretty(&mut w, &Output { predictions_config, config, fit })?;
    }
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Input WAV
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub profile: ProfileArg,
    /// Output WAV, written at the input rate and sample format
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-channel gain trajectories as CSV
    #[arg(long)]
    pub gains: Option<PathBuf>,
}

pub fn simulate_cmd(args: &SimulateArgs, cfg: &RunConfig) -> Result<()> {
    let (listener, profile) = args.profile.load()?;
    let x = read_wav(&args.input)?;
    let (y, gains) = synthesize_hl_with_gains(&x.samples, x.fs(), &profile, &cfg.simulator)?;
    write_wav(&args.out, &y, x.sample_rate, x.format)?;
    if let Some(g) = &args.gains {
        gains.write_csv(create(g)?)?;
    }
    #[derive(Serialize)]
    struct Run<'a> {
        command: &'a str,
        input: String,
        listener: String,
        profile: toml::Value,
    }
    let run = Run {
        command: "simulate",
        input: args.input.display().to_string(),
        listener,
        profile: toml::from_str(&profile.to_toml()?)?,
    };
    write_sidecar(&args.out, cfg, &run)
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// Clean speech WAV
    #[arg(long)]
    pub speech: PathBuf,
    /// Noise WAV; repeat to sum several (e.g. one source at two room
    /// distances). Speech-shaped noise from --seed when absent
    #[arg(long)]
    pub noise: Vec<PathBuf>,
    /// Speech-to-noise ratio in dB
    #[arg(long, allow_hyphen_values = true)]
    pub snr: f64,
    /// Output mixture WAV
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the scaled noise, e.g. for `irm`
    #[arg(long = "noise-out")]
    pub noise_out: Option<PathBuf>,
}

pub fn mix_cmd(args: &MixArgs, cfg: &RunConfig) -> Result<()> {
    let s = read_wav(&args.speech)?;
    let noise = if args.noise.is_empty() {
        speech_shaped_noise(s.samples.len(), s.fs(), cfg.seed)
    } else {
        let mut sum: Vec<f64> = Vec::new();
        for p in &args.noise {
            let n = read_wav(p)?;
            same_rate(&s, &n, "mix")?;
            if n.samples.len() > sum.len() {
                sum.resize(n.samples.len(), 0.0);
            }
            for (acc, v) in sum.iter_mut().zip(&n.samples) {
                *acc += v;
            }
        }
        sum
    };
    let m = mix_at_snr(&s.samples, &noise, args.snr)?;
    write_wav(&args.out, &m.mixture, s.sample_rate, s.format)?;
    if let Some(p) = &args.noise_out {
        write_wav(p, &m.scaled_noise, s.sample_rate, s.format)?;
    }
    #[derive(Serialize)]
    struct Run {
        command: &'static str,
        speech: String,
        noise: Vec<String>,
        snr_db: f64,
        noise_gain: f64,
    }
    let run = Run {
        command: "mix",
        speech: args.speech.display().to_string(),
        noise: if args.noise.is_empty() {
            vec![format!("speech-shaped, seed {}", cfg.seed)]
        } else {
            args.noise.iter().map(|p| p.display().to_string()).collect()
        },
        snr_db: args.snr,
        noise_gain: m.noise_gain,
    };
    write_sidecar(&args.out, cfg, &run)
}

#[derive(Debug, Args)]
pub struct IrmArgs {
    /// Clean speech WAV
    #[arg(long)]
    pub clean: PathBuf,
    /// Noise WAV as present in the mixture
    #[arg(long)]
    pub noise: PathBuf,
    /// Enhanced output WAV
    #[arg(long)]
    pub out: PathBuf,
}

pub fn irm_cmd(args: &IrmArgs, cfg: &RunConfig) -> Result<()> {
    let s = read_wav(&args.clean)?;
    let n = read_wav(&args.noise)?;
    same_rate(&s, &n, "irm")?;
    let y = ideal_ratio_mask(&s.samples, &n.samples, s.fs(), &cfg.irm)?;
    write_wav(&args.out, &y, s.sample_rate, s.format)?;
    #[derive(Serialize)]
    struct Run {
        command: &'static str,
        clean: String,
        noise: String,
        input_snr_db: f64,
    }
    let k = s.samples.len().min(n.samples.len());
    let run = Run {
        command: "irm",
        clean: args.clean.display().to_string(),
        noise: args.noise.display().to_string(),
        input_snr_db: measured_snr_db(&s.samples[..k], &n.samples[..k]),
    };
    write_sidecar(&args.out, cfg, &run)
}

#[derive(Debug, Args)]
pub struct ReverbArgs {
    /// Dry input WAV
    #[arg(long)]
    pub input: PathBuf,
    /// Room impulse response WAV at the same rate
    #[arg(long)]
    pub rir: PathBuf,
    /// Output WAV, input length plus the response tail
    #[arg(long)]
    pub out: PathBuf,
}

pub fn reverb_cmd(args: &ReverbArgs, cfg: &RunConfig) -> Result<()> {
    let x = read_wav(&args.input)?;
    let h = read_wav(&args.rir)?;
    same_rate(&x, &h, "reverb")?;
    let y = apply_rir(&x.samples, &h.samples)?;
    write_wav(&args.out, &y, x.sample_rate, x.format)?;
    #[derive(Serialize)]
    struct Run {
        command: &'static str,
        input: String,
        rir: String,
    }
    let run = Run {
        command: "reverb",
        input: args.input.display().to_string(),
        rir: args.rir.display().to_string(),
    };
    write_sidecar(&args.out, cfg, &run)
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Prediction table from `batch`
    #[arg(long)]
    pub predictions: PathBuf,
    /// Output directory for tables and SVG plots
    #[arg(long)]
    pub out: PathBuf,
}

pub fn report_cmd(args: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.predictions)
        .with_context(|| format!("reading {}", args.predictions.display()))?;
    let rows: Vec<ReportRow> = read_predictions(text.as_bytes())?
        .into_iter()
        .filter(|r| !r.failed())
        .filter_map(|r| {
            Some(ReportRow {
                predicted: r.intelligibility?,
                observed: r.si,
                listener: r.listener,
                condition: r.condition,
                snr_db: r.snr_db,
            })
        })
        .collect();
    let config = read_config_header(&text);
    let files = write_report(&args.out, &rows, (!config.is_empty()).then_some(config.as_str()))?;
    eprintln!("wrote {} and {}", files.table.display(), files.curves_svg.display());
    Ok(())
}
