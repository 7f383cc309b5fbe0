use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{f_sf, normal_quantile, normal_sf, t_two_sided};
use crate::{Error, Result};

/// Test statistic and two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

/// Shapiro-Wilk W with Royston's approximation for the coefficients and the
/// p-value.
pub fn shapiro_wilk(sample: &[f64]) -> Result<TestResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Degenerate(format!("Shapiro-Wilk needs 3 ≤ n ≤ 5000, got {n}")));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let ss: f64 = {
        let m = mean(&x);
        x.iter().map(|v| (v - m).powi(2)).sum()
    };
    if ss <= 0.0 || !ss.is_finite() {
        return Err(Error::Degenerate("Shapiro-Wilk on a constant sample".into()));
    }
    let nf = n as f64;
    // coefficients are antisymmetric: a[i] = −a[n − 1 − i]
    let mut a = vec![0.0; n];
    if n == 3 {
        a[0] = -0.5f64.sqrt();
        a[2] = 0.5f64.sqrt();
    } else {
        let m: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.375) / (nf + 0.25))).collect();
        let summ2: f64 = m.iter().map(|v| v * v).sum();
        let u = 1.0 / nf.sqrt();
        let an = m[n - 1] / summ2.sqrt() + poly(&[0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], u);
        let (fixed, phi) = if n > 5 {
            let an1 = m[n - 2] / summ2.sqrt() + poly(&[0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], u);
            a[n - 2] = an1;
            a[1] = -an1;
            let phi = (summ2 - 2.0 * m[n - 1].powi(2) - 2.0 * m[n - 2].powi(2))
                / (1.0 - 2.0 * an.powi(2) - 2.0 * an1.powi(2));
            (2, phi)
        } else {
            (1, (summ2 - 2.0 * m[n - 1].powi(2)) / (1.0 - 2.0 * an.powi(2)))
        };
        a[n - 1] = an;
        a[0] = -an;
        for i in fixed..n - fixed {
            a[i] = m[i] / phi.sqrt();
        }
    }
    let num: f64 = a.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>().powi(2);
    let w = (num / ss).min(1.0);

    let p = if n == 3 {
        (6.0 / PI * (w.sqrt().asin() - 0.75f64.sqrt().asin())).max(0.0)
    } else {
        let y = (1.0 - w).ln();
        if n <= 11 {
            let gamma = poly(&[-2.273, 0.459], nf);
            if y >= gamma {
                1e-99
            } else {
                let y = -(gamma - y).ln();
                let mu = poly(&[0.544, -0.39978, 0.025054, -6.714e-4], nf);
                let sigma = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
                normal_sf((y - mu) / sigma)
            }
        } else {
            let ln_n = nf.ln();
            let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
            let sigma = poly(&[-0.4803, -0.082676, 0.0030302], ln_n).exp();
            normal_sf((y - mu) / sigma)
        }
    };
    Ok(TestResult { statistic: w, p: p.clamp(0.0, 1.0) })
}

/// Mid-ranks (1-based) and the tie-group sizes.
fn rank(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Mann-Whitney U of `a` with the tie-corrected normal approximation and
/// continuity correction, two-sided.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::Degenerate(format!(
            "Mann-Whitney needs 3 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    if all.iter().all(|v| *v == all[0]) {
        return Err(Error::Degenerate("Mann-Whitney on identical values".into()));
    }
    let (ranks, ties) = rank(&all);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let sigma = (n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))).sqrt();
    let u = u1.max(n1 * n2 - u1);
    let z = (u - n1 * n2 / 2.0 - 0.5) / sigma;
    Ok(TestResult { statistic: u1, p: (2.0 * normal_sf(z)).clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

pub fn t_test_independent(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Degenerate(format!("t-test needs 2 values per sample, got {} and {}", a.len(), b.len())));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (v1, v2) = (sample_var(a), sample_var(b));
    if v1 == 0.0 && v2 == 0.0 {
        return Err(Error::Degenerate("t-test with zero variance in both samples".into()));
    }
    let diff = mean(a) - mean(b);
    let (se, df) = match kind {
        TTestKind::Welch => {
            let (q1, q2) = (v1 / n1, v2 / n2);
            ((q1 + q2).sqrt(), (q1 + q2).powi(2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0)))
        }
        TTestKind::Pooled => {
            let df = n1 + n2 - 2.0;
            let sp = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
            ((sp * (1.0 / n1 + 1.0 / n2)).sqrt(), df)
        }
    };
    let t = diff / se;
    Ok(TTestResult { t, p: t_two_sided(t, df), df })
}

pub fn anova_oneway(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::Degenerate("ANOVA needs at least 2 groups of at least 2 values".into()));
    }
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n;
    let between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        })
        .sum();
    if within == 0.0 {
        if between == 0.0 {
            return Ok(TestResult { statistic: 0.0, p: 1.0 });
        }
        return Err(Error::Degenerate("ANOVA with zero within-group variance".into()));
    }
    let (d1, d2) = (k - 1.0, n - k);
    let f = (between / d1) / (within / d2);
    Ok(TestResult { statistic: f, p: f_sf(f, d1, d2) })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Degenerate(format!("Pearson needs equal lengths ≥ 3, got {} and {}", x.len(), y.len())));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("Pearson correlation with a constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
