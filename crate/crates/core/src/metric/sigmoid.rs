//! Logistic mapping from the metric `d` to a word-correct score, and its
//! least-squares calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_I_MAX: f64 = 85.0;
pub const DEFAULT_A: f64 = -23.3;
pub const DEFAULT_B: f64 = 13.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SigmoidParams {
    pub a: f64,
    pub b: f64,
    pub i_max: f64,
}

impl Default for SigmoidParams {
    fn default() -> Self {
        Self {
            a: DEFAULT_A,
            b: DEFAULT_B,
            i_max: DEFAULT_I_MAX,
        }
    }
}

impl SigmoidParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_max > 0.0 && self.i_max <= 100.0) {
            return Err(Error::Config(format!("i_max must be in (0, 100], got {}", self.i_max)));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::Config("sigmoid a and b must be finite".into()));
        }
        Ok(())
    }

    /// `d` at which the score is `i_max / 2`.
    pub fn midpoint(&self) -> f64 {
        -self.b / self.a
    }
}

/// `1 / (1 + exp(z))` without overflow for large `|z|`.
fn logistic_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// `I = i_max / (1 + exp(a d + b))`.
pub fn sigmoid(d: f64, p: &SigmoidParams) -> f64 {
    p.i_max * logistic_neg(p.a * d + p.b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    /// Points per axis of the starting grid.
    pub grid_points: usize,
    pub max_iter: usize,
    /// Stop when the parameter step norm drops below this.
    pub step_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            a_range: (-100.0, 100.0),
            b_range: (-50.0, 50.0),
            grid_points: 100,
            max_iter: 200,
            step_tol: 1e-10,
        }
    }
}

impl FitOptions {
    /// Grid coordinate `k` of `n` on `range`, endpoints included.
    pub fn grid_value(range: (f64, f64), k: usize, n: usize) -> f64 {
        if n <= 1 {
            return 0.5 * (range.0 + range.1);
        }
        range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub params: SigmoidParams,
    pub sse: f64,
    pub iterations: usize,
}

/// Sum of squared errors of `params` on `(d, si)` pairs.
pub fn sse(pairs: &[(f64, f64)], params: &SigmoidParams) -> f64 {
    pairs
        .iter()
        .map(|&(d, y)| (sigmoid(d, params) - y).powi(2))
        .sum()
}

/// Least-squares `(a, b)` for fixed `i_max`: best point of a coarse grid,
/// refined by Levenberg–Marquardt steps that are accepted only when they
/// lower the error.
pub fn fit_sigmoid(pairs: &[(f64, f64)], i_max: f64, opts: &FitOptions) -> Result<SigmoidFit> {
    if pairs.iter().any(|(d, y)| !d.is_finite() || !y.is_finite()) {
        return Err(Error::Data("fit pairs must be finite".into()));
    }
    let d0 = pairs.first().map(|p| p.0);
    if pairs.len() < 2 || pairs.iter().all(|p| Some(p.0) == d0) {
        return Err(Error::Numeric("need at least 2 pairs with distinct d".into()));
    }
    let y0 = pairs[0].1;
    if pairs.iter().all(|p| p.1 == y0) {
        return Err(Error::Numeric("all SI values are identical; the fit is degenerate".into()));
    }
    SigmoidParams { a: 0.0, b: 0.0, i_max }.validate()?;

    let n = opts.grid_points.max(1);
    let mut best = SigmoidParams { a: 0.0, b: 0.0, i_max };
    let mut best_sse = f64::INFINITY;
    for ka in 0..n {
        for kb in 0..n {
            let p = SigmoidParams {
                a: FitOptions::grid_value(opts.a_range, ka, n),
                b: FitOptions::grid_value(opts.b_range, kb, n),
                i_max,
            };
            let e = sse(pairs, &p);
            if e < best_sse {
                best = p;
                best_sse = e;
            }
        }
    }

    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        // normal equations of the Jacobian: dI/da = -I(1 - I/imax) d, dI/db = -I(1 - I/imax)
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, y) in pairs {
            let i = sigmoid(d, &best);
            let s = -i * (1.0 - i / i_max);
            let (da, db) = (s * d, s);
            let r = i - y;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let (aa, bb) = (jaa * (1.0 + lambda) + 1e-300, jbb * (1.0 + lambda) + 1e-300);
            let det = aa * bb - jab * jab;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(bb * ga - jab * gb) / det;
            let step_b = -(aa * gb - jab * ga) / det;
            let cand = SigmoidParams {
                a: best.a + step_a,
                b: best.b + step_b,
                i_max,
            };
            let e = sse(pairs, &cand);
            if e.is_finite() && e <= best_sse {
                let step = step_a.hypot(step_b);
                best = cand;
                best_sse = e;
                lambda = (lambda / 10.0).max(1e-12);
                improved = step >= opts.step_tol;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !best_sse.is_finite() {
        return Err(Error::Numeric("sigmoid fit diverged".into()));
    }
    Ok(SigmoidFit {
        params: best,
        sse: best_sse,
        iterations,
    })
}
