//! Acceptance checks. Runs as a plain binary (no libtest harness) so that
//! every criterion prints one PASS/FAIL line; the process fails if any does.

use std::time::Instant;

use gesi_core::alignment::{channel_align, shift_trajectory};
use gesi_core::audio::{write_wav, SampleFormat};
use gesi_core::dsp::{db20, rms};
use gesi_core::frontend::{analyze_epgram, EPgram, Filterbank, FrontendConfig};
use gesi_core::harness::batch::{batch_predict, write_predictions, BatchOptions, ProfileSet};
use gesi_core::harness::stats::{pearson, rmse, spearman};
use gesi_core::metric::sigmoid::sse;
use gesi_core::metric::{
    fit_sigmoid, predict, sigmoid, similarity, FitOptions, GesiConfig, NormalizationMode, PredictionIds,
    SigmoidParams, WeightSet, Weighting,
};
use gesi_core::modulation::{tmtf_gains, MfbConfig, ModulationEnvelopes};
use gesi_core::profiles::{interpolate_hl, Audiogram, ListenerProfile, Manifest, ManifestRecord, Tmtf};
use gesi_core::simulator::{synthesize_hl, synthesize_hl_with_gains, SimulatorConfig};
use gesi_core::stimulus::synth::{speech_shaped_noise, synthetic_word, white_noise};
use gesi_core::stimulus::{ideal_ratio_mask, measured_snr_db, mix_at_snr, IrmConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn tone(fs: f64, freq: f64, amp: f64, secs: f64) -> Vec<f64> {
    (0..(fs * secs) as usize)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
        .collect()
}

// 1. identity pipeline under unit weights, and runtime on one thread
fn identity_pipeline() -> Outcome {
    let fs = 48000.0;
    let x = synthetic_word(fs, 1.0, 130.0);
    let nh = ListenerProfile::normal_hearing();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut worst_time = 0.0f64;
    for mode in [NormalizationMode::Literal, NormalizationMode::ChannelSum] {
        let cfg = GesiConfig {
            weighting: Weighting::Unit,
            mode,
            ..GesiConfig::default()
        };
        let start = Instant::now();
        let p = pool
            .install(|| predict(&x, &x, fs, &nh, &cfg, PredictionIds::default()))
            .map_err(|e| e.to_string())?;
        worst_time = worst_time.max(start.elapsed().as_secs_f64());
        check(
            p.record.n_channels == 100 && p.record.n_bands == 6,
            format!("expected 100x6, got {}x{}", p.record.n_channels, p.record.n_bands),
        )?;

        let ep = analyze_epgram(&x, fs, &nh, &cfg.frontend).map_err(|e| e.to_string())?;
        let means = ep.channel_means();
        let mut audible_cells = 0usize;
        let mut valid = 0usize;
        for (i, row) in p.similarity.s.iter().enumerate() {
            for &s in row {
                if means[i] > 0.0 {
                    audible_cells += 1;
                    check((s - 1.0).abs() < 1e-6, format!("S[{i}] = {s} on an audible channel"))?;
                }
                if s != 0.0 {
                    valid += 1;
                }
            }
        }
        check(audible_cells > 0, "no audible channel".into())?;
        let cells = valid as f64;
        let bound = match mode {
            NormalizationMode::Literal => cells / (6.0 * 100.0),
            NormalizationMode::ChannelSum => cells / 6.0,
        };
        check(
            (p.record.d - bound).abs() < 1e-6 && (p.record.d - p.record.d_self).abs() < 1e-6,
            format!("{} d = {} vs maximum {bound}", mode.as_str(), p.record.d),
        )?;
    }
    check(worst_time < 5.0, format!("runtime {worst_time:.2} s"))?;
    Ok(format!("S = 1 on audible cells, d at maximum, {worst_time:.2} s single-threaded"))
}

// 2. TMTF gain constants
fn tmtf_constants() -> Outcome {
    let cfg = MfbConfig::default();
    for (j, &fm) in cfg.center_freqs_hz.iter().enumerate().skip(1) {
        let nh = Tmtf::new(-23.2, fm).map_err(|e| e.to_string())?;
        let hl = Tmtf::new(-23.2, fm).map_err(|e| e.to_string())?;
        let (ar, at) = tmtf_gains(&cfg, &nh, &hl).map_err(|e| e.to_string())?;
        let target = std::f64::consts::FRAC_1_SQRT_2;
        check(
            (ar[j] - target).abs() < 1e-9 && (at[j] - target).abs() < 1e-9,
            format!("band {j}: {} / {}", ar[j], at[j]),
        )?;
        check(ar[0] == 1.0 && at[0] == 1.0, "first band gain is not exactly 1".into())?;
    }
    let (ar, at) = tmtf_gains(&cfg, &Tmtf::normal_hearing(), &Tmtf::new(-12.0, 20.0).unwrap()).unwrap();
    check(ar[0] == 1.0 && at[0] == 1.0, "first band gain is not exactly 1 for a listener TMTF".into())?;
    Ok("A_j(F_c) = 1/sqrt(2) for every band, A_1 = 1".into())
}

// 3. sigmoid midpoint
fn sigmoid_midpoint() -> Outcome {
    let p = SigmoidParams { a: -23.3, b: 13.5, i_max: 85.0 };
    let mid = 13.5 / 23.3;
    check((p.midpoint() - mid).abs() < 1e-9, format!("midpoint {}", p.midpoint()))?;
    let i = sigmoid(mid, &p);
    check((i - 42.5).abs() < 1e-9, format!("I(midpoint) = {i}"))?;
    let q = SigmoidParams { a: 3.0, b: -1.2, i_max: 85.0 };
    check((sigmoid(0.4, &q) - 42.5).abs() < 1e-9, "a d + b = 0 does not give 42.5".into())?;
    Ok(format!("I = 42.5 at d = {mid:.6}"))
}

fn random_envelopes(rng: &mut ChaCha8Rng, n: usize, m: usize, t: usize) -> ModulationEnvelopes {
    ModulationEnvelopes {
        values: (0..n)
            .map(|_| (0..m).map(|_| (0..t).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect())
            .collect(),
        config: MfbConfig {
            center_freqs_hz: (0..m).map(|j| 2f64.powi(j as i32)).collect(),
            q: 1.0,
        },
    }
}

// 4. gain-exponent law of the similarity
fn gain_exponent_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, m, t) = (3, 2, 64);
    let mut worst = 0.0f64;
    let mut worst_half = 0.0f64;
    for _ in 0..1000 {
        let r = random_envelopes(&mut rng, n, m, t);
        let x = random_envelopes(&mut rng, n, m, t);
        let ssi: Vec<Vec<f64>> = (0..n).map(|_| (0..t).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let w = WeightSet {
            ssi,
            eff: vec![1.0; n],
            h_max: 5.0,
            eta: 0.7,
            n_audible: n,
            inaudible: false,
        };
        let g: f64 = rng.gen_range(0.05..20.0);
        let rho: f64 = rng.gen_range(0.0..1.0);
        let expect = g.powf(2.0 * rho - 1.0);
        let base = similarity(&r, &x, &w, rho).unwrap();
        let scaled = similarity(&r, &x.scaled(g), &w, rho).unwrap();
        for (a, b) in base.s.iter().flatten().zip(scaled.s.iter().flatten()) {
            if a.abs() > 1e-6 {
                worst = worst.max((b / a - expect).abs() / expect.max(1.0));
            }
        }
        let base = similarity(&r, &x, &w, 0.5).unwrap();
        let scaled = similarity(&r, &x.scaled(g), &w, 0.5).unwrap();
        for (a, b) in base.s.iter().flatten().zip(scaled.s.iter().flatten()) {
            worst_half = worst_half.max((a - b).abs());
        }
    }
    check(worst < 1e-9, format!("worst ratio error {worst:e}"))?;
    check(worst_half < 1e-12, format!("rho = 0.5 not scale invariant ({worst_half:e})"))?;
    Ok(format!("1000 pairs, worst relative error {worst:.1e}"))
}

fn smooth_trajectory(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut y = 0.0;
    (0..n)
        .map(|_| {
            y = 0.95 * y + rng.gen_range(-1.0..1.0);
            20.0 + 4.0 * y
        })
        .collect()
}

// 5. per-channel alignment
fn alignment_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (channels, frames, frame_ms) = (6, 1200, 0.5);
    let limit = (30.0 / frame_ms) as isize;
    let ep = |levels: Vec<Vec<f64>>| EPgram {
        peak_freqs_hz: (0..levels.len()).map(|i| 200.0 * (i + 1) as f64).collect(),
        levels,
        frame_shift_ms: frame_ms,
    };
    let mut recovered = 0;
    for _ in 0..100 {
        let r: Vec<Vec<f64>> = (0..channels).map(|_| smooth_trajectory(&mut rng, frames)).collect();
        let shifts: Vec<isize> = (0..channels).map(|_| rng.gen_range(-limit..=limit)).collect();
        // test lags the reference by `s` frames
        let t: Vec<Vec<f64>> = r.iter().zip(&shifts).map(|(c, &s)| shift_trajectory(c, -s)).collect();
        let (_, rep) = channel_align(&ep(r), &ep(t), 30.0).map_err(|e| e.to_string())?;
        if rep.channel_lags_frames.iter().zip(&shifts).all(|(l, s)| (l - s).abs() <= 1) {
            recovered += 1;
        }
    }
    check(recovered == 100, format!("{recovered}/100 trials recovered"))?;

    let mut clamped = 0;
    for k in 0..20 {
        let r: Vec<Vec<f64>> = (0..channels).map(|_| smooth_trajectory(&mut rng, frames)).collect();
        let s = (limit + 10 + 10 * k) * if k % 2 == 0 { 1 } else { -1 };
        let t: Vec<Vec<f64>> = r.iter().map(|c| shift_trajectory(c, -s)).collect();
        let (_, rep) = channel_align(&ep(r), &ep(t), 30.0).map_err(|e| e.to_string())?;
        if rep.channel_lags_frames.iter().all(|&l| l == limit * s.signum()) {
            clamped += 1;
        }
    }
    check(clamped == 20, format!("{clamped}/20 large shifts clamped to the limit"))?;
    Ok("100/100 shifts within 1 frame; shifts beyond 30 ms clamped".into())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// 6. hearing-loss simulator self-consistency
fn simulator_consistency() -> Outcome {
    let fs = 48000.0;
    let cfg = SimulatorConfig::default();
    let fe = FrontendConfig::default();
    let nh = ListenerProfile::normal_hearing();
    let x = synthetic_word(fs, 1.0, 130.0);
    let flat40 = ListenerProfile::new(Audiogram::flat(40.0).unwrap(), Tmtf::normal_hearing(), 1.0).unwrap();
    let oa7 = ListenerProfile::oa7_example();
    let mut summary = Vec::new();
    for (name, p) in [("flat 40 dB", &flat40), ("OA#7", &oa7)] {
        let y = synthesize_hl(&x, fs, p, &cfg).map_err(|e| e.to_string())?;
        let ep_sim = analyze_epgram(&y, fs, &nh, &fe).map_err(|e| e.to_string())?;
        let ep_p = analyze_epgram(&x, fs, p, &fe).map_err(|e| e.to_string())?;
        let dev: Vec<f64> = ep_p
            .levels
            .iter()
            .flatten()
            .zip(ep_sim.levels.iter().flatten())
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| (a - b).abs())
            .collect();
        check(!dev.is_empty(), format!("{name}: no audible cells"))?;
        let mad = median(dev);
        check(mad <= 3.0, format!("{name}: median deviation {mad:.2} dB"))?;
        summary.push(format!("{name} {mad:.2} dB"));
    }

    let oa7_passive = oa7.clone().with_alpha(1.0).unwrap();
    for f in [500.0, 1000.0, 2000.0, 4000.0] {
        let t = tone(fs, f, 0.05, 0.5);
        let y = synthesize_hl(&t, fs, &oa7_passive, &cfg).map_err(|e| e.to_string())?;
        let mid = |v: &[f64]| rms(&v[v.len() / 4..3 * v.len() / 4]);
        let att = -db20(mid(&y) / mid(&t));
        let hl = interpolate_hl(&oa7_passive.audiogram, f);
        check((att - hl).abs() <= 2.0, format!("{f} Hz tone attenuated {att:.2} dB, audiogram {hl:.2} dB"))?;
    }

    let fp = Filterbank::new(&fe, fs).unwrap().peak_freqs_hz();
    for f in [1000.0, 4000.0] {
        let ch = (0..fp.len())
            .min_by(|&a, &b| (fp[a] - f).abs().total_cmp(&(fp[b] - f).abs()))
            .unwrap();
        let gain = |amp: f64| -> Result<f64, String> {
            let (_, g) = synthesize_hl_with_gains(&tone(fs, f, amp, 0.3), fs, &oa7, &cfg).map_err(|e| e.to_string())?;
            let row = &g.gains_db[ch];
            Ok(row[row.len() / 2])
        };
        let (quiet, loud) = (gain(0.002)?, gain(0.2)?);
        check(quiet.abs() > loud.abs(), format!("{f} Hz: loss {quiet:.2} dB quiet vs {loud:.2} dB loud"))?;
    }
    Ok(format!("median deviation {}; tone attenuation within 2 dB; recruitment holds", summary.join(", ")))
}

// 7. d increases with SNR
fn snr_monotonicity() -> Outcome {
    let fs = 16000.0;
    let word = synthetic_word(fs, 0.8, 130.0);
    let cfg = GesiConfig::default();
    let nh = ListenerProfile::normal_hearing();
    let snrs = [-6.0, 0.0, 6.0, 12.0];
    let mut means = Vec::new();
    for &snr in &snrs {
        let mut acc = 0.0;
        for seed in 0..10 {
            let noise = white_noise(word.len(), 100 + seed);
            let mix = mix_at_snr(&word, &noise, snr).map_err(|e| e.to_string())?;
            let p = predict(&word, &mix.mixture, fs, &nh, &cfg, PredictionIds::default()).map_err(|e| e.to_string())?;
            acc += p.record.d;
        }
        means.push(acc / 10.0);
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let rho = spearman(&snrs, &means).map_err(|e| e.to_string())?.r;
    check(increasing && (rho - 1.0).abs() < 1e-12, format!("mean d {means:?}, spearman {rho}"))?;
    Ok(format!(
        "mean d {}",
        means.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(" < ")
    ))
}

// 8. ideal ratio mask
fn irm_sanity() -> Outcome {
    let fs = 16000.0;
    let cfg = IrmConfig::default();
    let clean = synthetic_word(fs, 1.0, 130.0);
    let y = ideal_ratio_mask(&clean, &vec![0.0; clean.len()], fs, &cfg).map_err(|e| e.to_string())?;
    let err = rms(&y.iter().zip(&clean).map(|(a, b)| a - b).collect::<Vec<_>>());
    check(err < 1e-9, format!("zero-noise error {err:e}"))?;

    let noise = speech_shaped_noise(clean.len(), fs, 8);
    let mix = mix_at_snr(&clean, &noise, 0.0).map_err(|e| e.to_string())?;
    let enhanced = ideal_ratio_mask(&clean, &mix.scaled_noise, fs, &cfg).map_err(|e| e.to_string())?;
    let residual: Vec<f64> = enhanced.iter().zip(&clean).map(|(a, b)| a - b).collect();
    let before = measured_snr_db(&clean, &mix.scaled_noise);
    let after = measured_snr_db(&clean, &residual);
    check(after - before > 5.0, format!("SNR {before:.2} -> {after:.2} dB"))?;
    Ok(format!("identity error {err:.1e}; SNR {before:.1} -> {after:.1} dB"))
}

fn permutation_p(x: &[f64], y: &[f64], rounds: usize, rng: &mut ChaCha8Rng) -> f64 {
    let r0 = pearson(x, y).unwrap().r.abs();
    let mut y2 = y.to_vec();
    let mut hits = 0;
    for _ in 0..rounds {
        y2.shuffle(rng);
        if pearson(x, &y2).unwrap().r.abs() >= r0 - 1e-15 {
            hits += 1;
        }
    }
    hits as f64 / rounds as f64
}

// 9. statistics and fitting oracles
fn statistics_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let n = rng.gen_range(3..40);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let mut se = 0.0;
        for i in 0..n {
            se += (x[i] - y[i]) * (x[i] - y[i]);
        }
        let brute_rmse = (se / n as f64).sqrt();
        let r = rmse(&x, &y).unwrap();
        check((r - brute_rmse).abs() < 1e-12 * brute_rmse.max(1.0), format!("rmse {r} vs {brute_rmse}"))?;

        let (mut sx, mut sy) = (0.0, 0.0);
        for i in 0..n {
            sx += x[i];
            sy += y[i];
        }
        let (mx, my) = (sx / n as f64, sy / n as f64);
        let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            cxy += (x[i] - mx) * (y[i] - my);
            cxx += (x[i] - mx) * (x[i] - mx);
            cyy += (y[i] - my) * (y[i] - my);
        }
        let brute_r = cxy / (cxx.sqrt() * cyy.sqrt());
        let c = pearson(&x, &y).unwrap();
        check((c.r - brute_r).abs() < 1e-12, format!("pearson {} vs {brute_r}", c.r))?;
    }

    let mut worst_p = 0.0f64;
    for slope in [0.0, 0.3, 0.6] {
        let x: Vec<f64> = (0..15).map(|_| rng.gen_range(0.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + rng.gen_range(0.0..0.5)).collect();
        let p = pearson(&x, &y).unwrap().p;
        let perm = permutation_p(&x, &y, 100_000, &mut rng);
        worst_p = worst_p.max((p - perm).abs());
    }
    check(worst_p < 0.02, format!("p-value off the permutation oracle by {worst_p:.4}"))?;

    let opts = FitOptions::default();
    let truth = SigmoidParams { a: -20.0, b: 11.0, i_max: 85.0 };
    let ds: Vec<f64> = (0..16).map(|k| 0.25 + 0.04 * k as f64).collect();
    let clean: Vec<(f64, f64)> = ds.iter().map(|&d| (d, sigmoid(d, &truth))).collect();
    let fit = fit_sigmoid(&clean, 85.0, &opts).map_err(|e| e.to_string())?;
    let (ea, eb) = ((fit.params.a / truth.a - 1.0).abs(), (fit.params.b / truth.b - 1.0).abs());
    check(ea < 0.01 && eb < 0.01, format!("recovered a = {}, b = {}", fit.params.a, fit.params.b))?;

    let noisy: Vec<(f64, f64)> = clean.iter().map(|&(d, y)| (d, y + rng.gen_range(-6.0..6.0))).collect();
    let fit = fit_sigmoid(&noisy, 85.0, &opts).map_err(|e| e.to_string())?;
    let n = opts.grid_points;
    let mut grid_best = f64::INFINITY;
    for ka in 0..n {
        for kb in 0..n {
            let p = SigmoidParams {
                a: FitOptions::grid_value(opts.a_range, ka, n),
                b: FitOptions::grid_value(opts.b_range, kb, n),
                i_max: 85.0,
            };
            grid_best = grid_best.min(sse(&noisy, &p));
        }
    }
    check(fit.sse <= grid_best, format!("fit SSE {} above grid best {grid_best}", fit.sse))?;
    Ok(format!(
        "rmse/pearson exact; p within {worst_p:.4} of permutation; planted fit error {:.1e}; SSE {:.2} <= grid {:.2}",
        ea.max(eb),
        fit.sse,
        grid_best
    ))
}

// 10. deterministic batch output
fn batch_determinism() -> Outcome {
    let seed = 0u64;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fs = 16000u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = Manifest {
        base_dir: dir.path().to_path_buf(),
        records: Vec::new(),
    };
    let snrs = [-6.0, 0.0, 6.0, 12.0];
    for w in 0..2 {
        let word = synthetic_word(fs as f64, 0.4, 110.0 + 40.0 * w as f64);
        let ref_name = format!("word{w}.wav");
        write_wav(&dir.path().join(&ref_name), &word, fs, SampleFormat::Float32).map_err(|e| e.to_string())?;
        for k in 0..20 {
            let snr = snrs[k % 4];
            let noise = white_noise(word.len(), rng.gen());
            let mix = mix_at_snr(&word, &noise, snr).map_err(|e| e.to_string())?;
            let test_name = format!("mix{w}_{k}.wav");
            write_wav(&dir.path().join(&test_name), &mix.mixture, fs, SampleFormat::Float32).map_err(|e| e.to_string())?;
            manifest.records.push(ManifestRecord {
                reference: ref_name.clone().into(),
                test: test_name.into(),
                condition: "unpro".into(),
                snr_db: snr,
                listener: if k % 2 == 0 { "nh".into() } else { "oa7".into() },
                si: None,
            });
        }
    }
    let mut profiles = ProfileSet::new();
    profiles.insert("oa7", ListenerProfile::oa7_example());
    let cfg = GesiConfig::default();
    let toml = cfg.to_toml().map_err(|e| e.to_string())?;
    let run = || -> Result<Vec<u8>, String> {
        let rows = batch_predict(&manifest, &profiles, &cfg, &BatchOptions { threads: 4 }).map_err(|e| e.to_string())?;
        if let Some(bad) = rows.iter().find(|r| r.outcome.is_err()) {
            return Err(format!("row {} failed: {:?}", bad.index, bad.outcome));
        }
        let mut out = Vec::new();
        write_predictions(&mut out, &rows, Some(&toml)).map_err(|e| e.to_string())?;
        Ok(out)
    };
    let (a, b) = (run()?, run()?);
    check(manifest.records.len() == 40, "manifest is not 40 rows".into())?;
    check(a == b, "outputs differ between runs".into())?;
    let text = String::from_utf8(a).map_err(|e| e.to_string())?;
    let data_rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    check(data_rows == 40, format!("{data_rows} output rows"))?;
    Ok(format!("40 rows, {} identical bytes", text.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity pipeline", identity_pipeline),
        ("TMTF gain constants", tmtf_constants),
        ("sigmoid midpoint", sigmoid_midpoint),
        ("gain-exponent law", gain_exponent_law),
        ("alignment", alignment_recovery),
        ("HL simulator self-consistency", simulator_consistency),
        ("SNR monotonicity", snr_monotonicity),
        ("IRM sanity", irm_sanity),
        ("statistics oracles", statistics_oracles),
        ("determinism", batch_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg} [{secs:.1} s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg} [{secs:.1} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
