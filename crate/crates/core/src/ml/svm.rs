use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `1 / (d · var(X))` over all training values when `None`.
    pub gamma: Option<f64>,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tol: 1e-3, max_iter: 1_000_000 }
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

/// Two-class RBF machine, `f(x) = Σ αᵢyᵢK(xᵢ, x) − ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    support: Vec<Vec<f64>>,
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
    pub iterations: usize,
    pub objective: f64,
}

impl BinarySvm {
    /// Solves the dual by sequential minimal optimization, choosing the
    /// maximal violating pair each step. `y` holds ±1.
    pub fn fit(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, tol: f64, max_iter: usize) -> Result<Self> {
        let n = x.len();
        if !(c > 0.0 && gamma > 0.0 && tol > 0.0) {
            return Err(Error::Config("svm C, gamma and tolerance must be positive".into()));
        }
        if !(y.contains(&1.0) && y.contains(&-1.0)) {
            return Err(Error::Degenerate("svm training data holds a single class".into()));
        }
        let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rbf(&x[i], &x[j], gamma)).collect()).collect();
        let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
        let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
        let objective =
            |alpha: &[f64], grad: &[f64]| 0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
        let mut iterations = 0;
        let (m_up, m_low) = loop {
            let mut i = usize::MAX;
            let mut j = usize::MAX;
            let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
            for t in 0..n {
                let v = -y[t] * grad[t];
                if up(alpha[t], y[t]) && v > gmax {
                    gmax = v;
                    i = t;
                }
                if low(alpha[t], y[t]) && v < gmin {
                    gmin = v;
                    j = t;
                }
            }
            if gmax - gmin < tol || i == usize::MAX || j == usize::MAX {
                break (gmax, gmin);
            }
            if iterations >= max_iter {
                return Err(Error::NotConverged { objective: objective(&alpha, &grad) });
            }
            iterations += 1;
            let (ai, aj) = (alpha[i], alpha[j]);
            if y[i] != y[j] {
                let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(1e-12);
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(1e-12);
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
            for t in 0..n {
                grad[t] += q(t, i) * di + q(t, j) * dj;
            }
        };
        // ρ = yᵢ∇ᵢ on free vectors; midpoint of the feasible interval otherwise
        let free: Vec<f64> = (0..n).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).map(|t| y[t] * grad[t]).collect();
        let rho = if free.is_empty() { -(m_up + m_low) / 2.0 } else { free.iter().sum::<f64>() / free.len() as f64 };
        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        Ok(Self {
            support: sv.iter().map(|&t| x[t].clone()).collect(),
            coef: sv.iter().map(|&t| alpha[t] * y[t]).collect(),
            rho,
            gamma,
            iterations,
            objective: objective(&alpha, &grad),
        })
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, a)| a * rbf(s, row, self.gamma)).sum::<f64>() - self.rho
    }

    pub fn support_count(&self) -> usize {
        self.support.len()
    }
}

/// One-vs-rest RBF machines; two classes use a single machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    machines: Vec<Option<BinarySvm>>,
    n_classes: usize,
}

pub fn scale_gamma(rows: &[Vec<f64>]) -> f64 {
    let vals: Vec<f64> = rows.iter().flatten().copied().collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let d = rows.first().map_or(1, Vec::len) as f64;
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0
    }
}

impl Svm {
    pub fn fit(data: &LabeledDataset, params: SvmParams) -> Result<Self> {
        data.require_two_classes()?;
        let gamma = params.gamma.unwrap_or_else(|| scale_gamma(&data.rows));
        let train = |positive: usize| {
            let y: Vec<f64> = data.labels.iter().map(|&l| if l == positive { 1.0 } else { -1.0 }).collect();
            BinarySvm::fit(&data.rows, &y, params.c, gamma, params.tol, params.max_iter)
        };
        let machines = if data.n_classes() == 2 {
            vec![Some(train(1)?)]
        } else {
            // classes absent from training get no machine and are never predicted
            let counts = data.class_counts();
            (0..data.n_classes()).map(|k| (counts[k] > 0).then(|| train(k)).transpose()).collect::<Result<_>>()?
        };
        Ok(Self { machines, n_classes: data.n_classes() })
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        if self.n_classes == 2 {
            return usize::from(self.machines[0].as_ref().is_some_and(|m| m.decision(row) > 0.0));
        }
        let scores: Vec<f64> =
            self.machines.iter().map(|m| m.as_ref().map_or(f64::NEG_INFINITY, |m| m.decision(row))).collect();
        scores.iter().enumerate().fold(0, |best, (k, &s)| if s > scores[best] { k } else { best })
    }
}
