//! Calibration on one subset of scores and evaluation on another.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{mean_ci95, pearson, rmse, Correlation, MeanCi};
use crate::error::{Error, Result};
use crate::metric::{fit_sigmoid, sigmoid, FitOptions, SigmoidParams};

/// One metric value paired with a measured score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub listener: String,
    pub condition: String,
    pub snr_db: f64,
    pub d: f64,
    pub si: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// The listener/condition pair was part of the calibration data.
    Closed,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListenerRmse {
    pub listener: String,
    pub condition: String,
    pub split: Split,
    pub rmse: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub split: Split,
    /// Mean and 95% interval of the per-listener RMSE.
    pub rmse: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub condition: String,
    pub snr_db: f64,
    pub observed: MeanCi,
    pub predicted: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub params: SigmoidParams,
    pub fit_sse: f64,
    pub per_listener: Vec<ListenerRmse>,
    pub per_condition: Vec<ConditionSummary>,
    pub curves: Vec<CurvePoint>,
    pub closed_rmse: Option<f64>,
    pub open_rmse: Option<f64>,
    /// Predicted vs observed over the evaluation set, when defined.
    pub correlation: Option<Correlation>,
}

fn key(o: &Observation) -> (String, String) {
    (o.listener.clone(), o.condition.clone())
}

/// Fits `(a, b)` on `train`, predicts `eval`, and summarises the errors.
pub fn fit_and_evaluate(train: &[Observation], eval: &[Observation], i_max: f64, opts: &FitOptions) -> Result<EvaluationReport> {
    if eval.is_empty() {
        return Err(Error::Data("evaluation set is empty".into()));
    }
    let pairs: Vec<(f64, f64)> = train.iter().map(|o| (o.d, o.si)).collect();
    let fit = fit_sigmoid(&pairs, i_max, opts)?;
    let params = fit.params;
    let closed_keys: BTreeSet<(String, String)> = train.iter().map(key).collect();
    let split_of = |k: &(String, String)| {
        if closed_keys.contains(k) {
            Split::Closed
        } else {
            Split::Open
        }
    };
    let pred: Vec<f64> = eval.iter().map(|o| sigmoid(o.d, &params)).collect();

    let mut groups: BTreeMap<(String, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (o, p) in eval.iter().zip(&pred) {
        let g = groups.entry(key(o)).or_default();
        g.0.push(*p);
        g.1.push(o.si);
    }
    let mut per_listener = Vec::new();
    for (k, (p, s)) in &groups {
        per_listener.push(ListenerRmse {
            listener: k.0.clone(),
            condition: k.1.clone(),
            split: split_of(k),
            rmse: rmse(p, s)?,
            n: p.len(),
        });
    }

    let mut by_cond: BTreeMap<(String, Split), Vec<f64>> = BTreeMap::new();
    for l in &per_listener {
        by_cond.entry((l.condition.clone(), l.split)).or_default().push(l.rmse);
    }
    let per_condition = by_cond
        .into_iter()
        .map(|((condition, split), v)| {
            Ok(ConditionSummary {
                condition,
                split,
                rmse: mean_ci95(&v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_snr: BTreeMap<(String, i64), (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (o, p) in eval.iter().zip(&pred) {
        // millidecibel key keeps float SNRs orderable
        let g = by_snr
            .entry((o.condition.clone(), (o.snr_db * 1000.0).round() as i64))
            .or_insert_with(|| (o.snr_db, Vec::new(), Vec::new()));
        g.1.push(o.si);
        g.2.push(*p);
    }
    let curves = by_snr
        .into_iter()
        .map(|((condition, _), (snr_db, s, p))| {
            Ok(CurvePoint {
                condition,
                snr_db,
                observed: mean_ci95(&s)?,
                predicted: mean_ci95(&p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let split_rmse = |want: Split| -> Result<Option<f64>> {
        let (p, s): (Vec<f64>, Vec<f64>) = eval
            .iter()
            .zip(&pred)
            .filter(|(o, _)| split_of(&key(o)) == want)
            .map(|(o, p)| (*p, o.si))
            .unzip();
        if p.is_empty() {
            Ok(None)
        } else {
            rmse(&p, &s).map(Some)
        }
    };
    let observed: Vec<f64> = eval.iter().map(|o| o.si).collect();
    Ok(EvaluationReport {
        params,
        fit_sse: fit.sse,
        per_listener,
        per_condition,
        curves,
        closed_rmse: split_rmse(Split::Closed)?,
        open_rmse: split_rmse(Split::Open)?,
        correlation: pearson(&pred, &observed).ok(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsamplingOptions {
    pub n_train_listeners: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Only this condition of the chosen listeners is used for fitting.
    pub train_condition: Option<String>,
}

impl Default for SubsamplingOptions {
    fn default() -> Self {
        Self {
            n_train_listeners: 5,
            repeats: 10,
            seed: 0,
            train_condition: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleRun {
    pub train_listeners: Vec<String>,
    pub params: SigmoidParams,
    pub closed_rmse: Option<f64>,
    pub open_rmse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSpread {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSpread {
    fn of(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() < 2 {
            0.0
        } else {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Self { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsamplingReport {
    pub runs: Vec<SubsampleRun>,
    pub a: MeanSpread,
    pub b: MeanSpread,
    pub closed_rmse: Option<MeanSpread>,
    pub open_rmse: Option<MeanSpread>,
}

/// Repeats [`fit_and_evaluate`] with a random subset of listeners as the
/// calibration set and all observations as the evaluation set.
pub fn repeated_subsampling(
    observations: &[Observation],
    sub: &SubsamplingOptions,
    i_max: f64,
    opts: &FitOptions,
) -> Result<SubsamplingReport> {
    let listeners: Vec<String> = observations
        .iter()
        .map(|o| o.listener.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if sub.n_train_listeners == 0 || sub.n_train_listeners > listeners.len() {
        return Err(Error::Data(format!(
            "cannot draw {} training listeners from {}",
            sub.n_train_listeners,
            listeners.len()
        )));
    }
    if sub.repeats == 0 {
        return Err(Error::Config("repeats must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub.seed);
    let mut runs = Vec::with_capacity(sub.repeats);
    for _ in 0..sub.repeats {
        let mut chosen: Vec<String> = listeners
            .choose_multiple(&mut rng, sub.n_train_listeners)
            .cloned()
            .collect();
        chosen.sort();
        let train: Vec<Observation> = observations
            .iter()
            .filter(|o| chosen.contains(&o.listener))
            .filter(|o| sub.train_condition.as_ref().is_none_or(|c| &o.condition == c))
            .cloned()
            .collect();
        let rep = fit_and_evaluate(&train, observations, i_max, opts)?;
        runs.push(SubsampleRun {
            train_listeners: chosen,
            params: rep.params,
            closed_rmse: rep.closed_rmse,
            open_rmse: rep.open_rmse,
        });
    }
    let col = |f: &dyn Fn(&SubsampleRun) -> Option<f64>| -> Vec<f64> { runs.iter().filter_map(f).collect() };
    Ok(SubsamplingReport {
        a: MeanSpread::of(&col(&|r| Some(r.params.a))).expect("at least one run"),
        b: MeanSpread::of(&col(&|r| Some(r.params.b))).expect("at least one run"),
        closed_rmse: MeanSpread::of(&col(&|r| r.closed_rmse)),
        open_rmse: MeanSpread::of(&col(&|r| r.open_rmse)),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::distributions::Distribution;
    use statrs::distribution::Normal;

    fn cohort(n_listeners: usize, sigma: f64, seed: u64) -> Vec<Observation> {
        let truth = SigmoidParams { a: -20.0, b: 11.0, i_max: 85.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        let mut out = Vec::new();
        for l in 0..n_listeners {
            for cond in ["unpro", "irm"] {
                for (k, snr) in [-6.0, 0.0, 6.0, 12.0].into_iter().enumerate() {
                    let d = 0.3 + 0.1 * k as f64 + if cond == "irm" { 0.05 } else { 0.0 } + 0.01 * l as f64;
                    let e = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    out.push(Observation {
                        listener: format!("L{l:02}"),
                        condition: cond.into(),
                        snr_db: snr,
                        d,
                        si: sigmoid(d, &truth) + e,
                    });
                }
            }
        }
        out
    }

    #[test]
    fn self_fit_noise_free() {
        let obs = cohort(4, 0.0, 0);
        let rep = fit_and_evaluate(&obs, &obs, 85.0, &FitOptions::default()).unwrap();
        assert!(rep.closed_rmse.unwrap() < 1.0);
        assert!(rep.open_rmse.is_none());
        assert!(rep.per_listener.iter().all(|l| l.split == Split::Closed));
        assert_eq!(rep.curves.len(), 8);
    }

    #[test]
    fn open_rmse_tracks_noise_level() {
        let sigma = 5.0;
        let obs = cohort(12, sigma, 1);
        let train: Vec<Observation> = obs.iter().filter(|o| o.listener.as_str() < "L05" && o.condition == "unpro").cloned().collect();
        let rep = fit_and_evaluate(&train, &obs, 85.0, &FitOptions::default()).unwrap();
        let open = rep.open_rmse.unwrap();
        assert!(open >= 0.5 * sigma && open <= 2.0 * sigma, "open rmse {open}");
        assert!(rep.per_condition.iter().any(|c| c.split == Split::Open));
    }

    #[test]
    fn subsampling_shape_and_determinism() {
        let obs = cohort(8, 3.0, 2);
        let sub = SubsamplingOptions {
            train_condition: Some("unpro".into()),
            ..SubsamplingOptions::default()
        };
        let a = repeated_subsampling(&obs, &sub, 85.0, &FitOptions::default()).unwrap();
        let b = repeated_subsampling(&obs, &sub, 85.0, &FitOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 10);
        assert!(a.runs.iter().all(|r| r.train_listeners.len() == 5));
        assert!(a.open_rmse.unwrap().sd >= 0.0);
        let too_many = SubsamplingOptions { n_train_listeners: 9, ..sub };
        assert!(repeated_subsampling(&obs, &too_many, 85.0, &FitOptions::default()).is_err());
    }
}
