//! Error and correlation statistics for comparing predictions to scores.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// z-value of a two-sided 95% interval.
pub const Z95: f64 = 1.96;

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} observations",
            predicted.len(),
            observed.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Data("rmse of an empty list".into()));
    }
    let mse = predicted
        .iter()
        .zip(observed)
        .map(|(p, s)| (p - s).powi(2))
        .sum::<f64>()
        / predicted.len() as f64;
    Ok(mse.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided p-value of `r` under the null of no correlation.
    pub p: f64,
    pub n: usize,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Sample Pearson correlation and its t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} vs {} values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Data("correlation needs at least 3 pairs".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Data("correlation of a constant series".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let t = if r.abs() == 1.0 {
        f64::INFINITY
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    Ok(Correlation {
        r,
        p: t_two_sided_p(t, df)?,
        n,
    })
}

/// Ranks starting at 1; ties share their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    /// Half width, `1.96 * sd / sqrt(n)`; zero for a single value.
    pub half_width: f64,
    pub n: usize,
}

pub fn mean_ci95(values: &[f64]) -> Result<MeanCi> {
    if values.is_empty() {
        return Err(Error::Data("confidence interval of an empty list".into()));
    }
    let n = values.len();
    let m = mean(values);
    let half_width = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        Z95 * (var / n as f64).sqrt()
    };
    Ok(MeanCi { mean: m, half_width, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[20.0, 30.0, 40.0], &[10.0, 20.0, 30.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson(&x, &y).unwrap();
        assert!((c.r - 1.0).abs() < 1e-15);
        assert!(c.p < 1e-12);
        assert!(pearson(&x, &[1.0; 10]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn reported_p_level_for_n15() {
        // r = -0.50 with 15 listeners sits just above the 0.05 level
        let t = -0.5 * (13.0f64 / 0.75).sqrt();
        let p = t_two_sided_p(t, 13.0).unwrap();
        assert!((p - 0.057).abs() < 0.002, "p = {p}");
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let s = spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 100.0]).unwrap();
        assert!((s.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ci_by_hand() {
        let ci = mean_ci95(&[2.0, 4.0, 6.0, 8.0]).unwrap();
        let sd = (20.0f64 / 3.0).sqrt();
        assert_eq!(ci.mean, 5.0);
        assert!((ci.half_width - 1.96 * sd / 2.0).abs() < 1e-12);
        assert_eq!(mean_ci95(&[3.0]).unwrap().half_width, 0.0);
    }

    proptest! {
        #[test]
        fn ci_shrinks_with_duplication(values in prop::collection::vec(-50.0f64..50.0, 2..20), k in 2usize..6) {
            let base = mean_ci95(&values).unwrap();
            prop_assume!(base.half_width > 1e-9);
            let dup: Vec<f64> = values.iter().cycle().take(values.len() * k).copied().collect();
            let d = mean_ci95(&dup).unwrap();
            // sample variance picks up a factor (n-1)k/(nk-1) on duplication
            let n = values.len() as f64;
            let kf = k as f64;
            let expect = base.half_width / kf.sqrt() * ((n - 1.0) * kf / (n * kf - 1.0)).sqrt();
            prop_assert!((d.half_width - expect).abs() < 1e-9 * expect.max(1.0));
        }
    }
}
