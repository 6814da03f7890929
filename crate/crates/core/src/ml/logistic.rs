use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizedLogisticConfig {
    pub runs: usize,
    /// Fraction of samples drawn (without replacement) per run.
    pub sample_fraction: f64,
    /// Each feature is scaled by a factor drawn uniformly from `[scaling, 1]`.
    pub scaling: f64,
    /// L1 penalty as a fraction of the smallest penalty that zeroes every coefficient.
    pub alpha_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for RandomizedLogisticConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            sample_fraction: 0.75,
            scaling: 0.5,
            alpha_ratio: 0.3,
            tol: 1e-6,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

/// Selection frequency per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeights {
    pub columns: Vec<String>,
    pub weights: Vec<f64>,
}

impl FeatureWeights {
    pub fn get(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.weights[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Full objective after every accepted step, starting from the zero model.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn linear(x: &[f64], w: &[f64], b: f64) -> f64 {
    x.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b
}

fn smooth_loss(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64) -> f64 {
    let n = x.len() as f64;
    x.iter()
        .zip(y)
        .map(|(r, &l)| {
            let z = linear(r, w, b);
            softplus(z) - if l { z } else { 0.0 }
        })
        .sum::<f64>()
        / n
}

/// Mean logistic loss plus `alpha·|w|_1` (the intercept is not penalised).
pub fn logistic_objective(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64, alpha: f64) -> f64 {
    smooth_loss(x, y, w, b) + alpha * w.iter().map(|c| c.abs()).sum::<f64>()
}

/// Gradient of the mean logistic loss: `(d/dw, d/db)`.
pub fn logistic_smooth_gradient(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (r, &l) in x.iter().zip(y) {
        let e = sigmoid(linear(r, w, b)) - if l { 1.0 } else { 0.0 };
        gb += e;
        for (g, a) in gw.iter_mut().zip(r) {
            *g += e * a;
        }
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

/// L1-penalised logistic regression by proximal gradient descent with
/// backtracking. Every accepted step satisfies the majorisation condition,
/// so the objective never increases.
pub fn fit_l1_logistic(x: &[Vec<f64>], y: &[bool], alpha: f64, tol: f64, max_iter: usize) -> L1Fit {
    let d = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0;
    let mut f = smooth_loss(x, y, &w, b);
    let mut trace = vec![f];
    let mut converged = false;
    for _ in 0..max_iter {
        let (gw, gb) = logistic_smooth_gradient(x, y, &w, b);
        let (nw, nb, nf, moved) = loop {
            let nw: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(c, g)| {
                    let v = c - step * g;
                    v.signum() * (v.abs() - step * alpha).max(0.0)
                })
                .collect();
            let nb = b - step * gb;
            let nf = smooth_loss(x, y, &nw, nb);
            let mut lin = (nb - b) * gb;
            let mut sq = (nb - b) * (nb - b);
            let mut moved = (nb - b).abs();
            for ((a, c), g) in nw.iter().zip(&w).zip(&gw) {
                lin += (a - c) * g;
                sq += (a - c) * (a - c);
                moved = moved.max((a - c).abs());
            }
            if nf <= f + lin + sq / (2.0 * step) || step < 1e-12 {
                break (nw, nb, nf, moved);
            }
            step *= 0.5;
        };
        w = nw;
        b = nb;
        f = nf;
        trace.push(f + alpha * w.iter().map(|c| c.abs()).sum::<f64>());
        if moved < tol {
            converged = true;
            break;
        }
        step *= 1.25;
    }
    L1Fit {
        coef: w,
        intercept: b,
        objective_trace: trace,
        converged,
    }
}

/// Z-scores each column; constant columns become zero.
pub fn standardize(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let stats: Vec<(f64, f64)> = (0..d)
        .map(|j| {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .collect();
    x.iter()
        .map(|r| r.iter().zip(&stats).map(|(v, &(m, s))| if s > 0.0 { (v - m) / s } else { 0.0 }).collect())
        .collect()
}

/// Stability selection with randomized L1-logistic fits: the weight of a
/// feature is the fraction of runs in which its coefficient is nonzero.
pub fn randomized_logistic_weights(columns: &[String], x: &[Vec<f64>], y: &[bool], cfg: &RandomizedLogisticConfig) -> Result<FeatureWeights> {
    if cfg.runs == 0 {
        return Err(Error::config("runs", "at least one run is needed"));
    }
    if !(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0) {
        return Err(Error::config("sample_fraction", "must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&cfg.scaling) {
        return Err(Error::config("scaling", "must lie in [0, 1]"));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!("{} rows for {} labels", x.len(), y.len())));
    }
    if x.iter().any(|r| r.len() != columns.len()) {
        return Err(Error::InvalidInput(format!("rows must have {} features", columns.len())));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let pos = y.iter().filter(|&&l| l).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::InvalidInput("randomized logistic regression needs both classes".into()));
    }
    let z = standardize(x);
    let n = z.len();
    let ybar = pos as f64 / n as f64;
    let alpha_max = (0..columns.len())
        .map(|j| (z.iter().zip(y).map(|(r, &l)| r[j] * (f64::from(u8::from(l)) - ybar)).sum::<f64>() / n as f64).abs())
        .fold(0.0, f64::max);
    let alpha = cfg.alpha_ratio * alpha_max;
    let m = ((cfg.sample_fraction * n as f64).round() as usize).clamp(2.min(n), n);
    let selected: Vec<Vec<bool>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = seed::rng(cfg.seed, &[run as u64]);
            let rows = index::sample(&mut rng, n, m).into_vec();
            let scale: Vec<f64> = (0..columns.len()).map(|_| rng.random_range(cfg.scaling..=1.0)).collect();
            let xs: Vec<Vec<f64>> = rows.iter().map(|&i| z[i].iter().zip(&scale).map(|(v, s)| v * s).collect()).collect();
            let ys: Vec<bool> = rows.iter().map(|&i| y[i]).collect();
            let fit = fit_l1_logistic(&xs, &ys, alpha, cfg.tol, cfg.max_iter);
            fit.coef.iter().map(|&c| c != 0.0).collect()
        })
        .collect();
    let weights = (0..columns.len())
        .map(|j| selected.iter().filter(|s| s[j]).count() as f64 / cfg.runs as f64)
        .collect();
    Ok(FeatureWeights {
        columns: columns.to_vec(),
        weights,
    })
}
