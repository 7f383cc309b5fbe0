//! Largest Lyapunov exponent by nearest-neighbour divergence (Rosenstein).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Embedding settings as configured. Unset fields are derived from the series
/// and its dominant period by [`EmbeddingConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub dim: usize,
    /// Lag in samples; default is the first zero crossing of the autocorrelation.
    pub delay: Option<usize>,
    /// Divergence tracking horizon; default one period.
    pub evolve_steps: Option<usize>,
    /// Minimum temporal separation of neighbours; default one period.
    pub min_separation: Option<usize>,
    pub fit_start: usize,
    /// Exclusive end of the fitted region; default half a period.
    pub fit_end: Option<usize>,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self { dim: 5, delay: None, evolve_steps: None, min_separation: None, fit_start: 0, fit_end: None }
    }
}

impl EmbeddingConfig {
    /// Fills in defaults for a series whose dominant period is
    /// `period_samples` long (mean stride for gait).
    pub fn resolve(&self, series: &[f64], period_samples: f64) -> Result<EmbeddingParams> {
        let period = period_samples.round().max(2.0) as usize;
        let delay = match self.delay {
            Some(d) => d,
            None => autocorrelation_zero(series)?,
        };
        let fit_end = self.fit_end.unwrap_or((period / 2).max(self.fit_start + 2));
        let params = EmbeddingParams {
            dim: self.dim,
            delay,
            evolve_steps: self.evolve_steps.unwrap_or(period.max(fit_end)),
            min_separation: self.min_separation.unwrap_or(period),
            fit: (self.fit_start, fit_end),
        };
        params.validate(series.len())?;
        Ok(params)
    }
}

/// Fully specified embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub delay: usize,
    pub evolve_steps: usize,
    pub min_separation: usize,
    /// Half-open range of divergence steps fitted by least squares.
    pub fit: (usize, usize),
}

/// Fewest reconstructed points accepted.
pub const MIN_EMBEDDED_POINTS: usize = 100;

impl EmbeddingParams {
    pub fn validate(&self, len: usize) -> Result<()> {
        if self.dim < 2 || self.delay == 0 {
            return Err(Error::Config(format!(
                "embedding needs dim ≥ 2 and delay ≥ 1, got {} and {}",
                self.dim, self.delay
            )));
        }
        if self.fit.1 < self.fit.0 + 2 || self.fit.1 > self.evolve_steps {
            return Err(Error::Config(format!(
                "fit range {:?} must hold at least 2 steps within evolve_steps {}",
                self.fit, self.evolve_steps
            )));
        }
        let points = len.saturating_sub((self.dim - 1) * self.delay);
        if points < MIN_EMBEDDED_POINTS || points <= self.evolve_steps {
            return Err(Error::Analysis(format!(
                "series of {len} samples embeds into {points} points; need at least {MIN_EMBEDDED_POINTS} and more than evolve_steps {}",
                self.evolve_steps
            )));
        }
        Ok(())
    }
}

/// Smallest lag at which the autocorrelation drops to zero or below.
pub fn autocorrelation_zero(series: &[f64]) -> Result<usize> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n.max(1) as f64;
    let x: Vec<f64> = series.iter().map(|v| v - mean).collect();
    for lag in 1..n / 2 {
        let c: f64 = x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
        if c <= 0.0 {
            return Ok(lag);
        }
    }
    Err(Error::Analysis("autocorrelation never crosses zero; cannot choose a delay".into()))
}

/// Mean log distance between initially nearest neighbours after `k` steps,
/// for `k` in `0..evolve_steps`.
pub fn divergence_curve(series: &[f64], p: &EmbeddingParams) -> Result<Vec<f64>> {
    p.validate(series.len())?;
    let n = series.len() - (p.dim - 1) * p.delay;
    let point = |i: usize| (0..p.dim).map(move |d| series[i + d * p.delay]);
    let m = n - p.evolve_steps;
    let embedded: Vec<f64> = (0..n).flat_map(point).collect();
    let row = |i: usize| &embedded[i * p.dim..(i + 1) * p.dim];
    let dist2 = |a: usize, b: usize| row(a).iter().zip(row(b)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();

    let mut neighbours = Vec::with_capacity(m);
    for i in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if i.abs_diff(j) < p.min_separation {
                continue;
            }
            let d = dist2(i, j);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        if let Some((j, _)) = best {
            neighbours.push((i, j));
        }
    }
    if neighbours.len() < MIN_EMBEDDED_POINTS / 2 {
        return Err(Error::Analysis(format!("only {} reference points have a separated neighbour", neighbours.len())));
    }

    let mut curve = Vec::with_capacity(p.evolve_steps);
    for k in 0..p.evolve_steps {
        let (sum, count) = neighbours
            .iter()
            .map(|&(i, j)| dist2(i + k, j + k).sqrt())
            .filter(|d| *d > 0.0)
            .fold((0.0, 0usize), |(s, c), d| (s + d.ln(), c + 1));
        if count == 0 {
            return Err(Error::Analysis(format!("all neighbour pairs coincide at step {k}")));
        }
        curve.push(sum / count as f64);
    }
    Ok(curve)
}

/// Least-squares slope of `y` against its index.
pub fn slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (num, den) = y.iter().enumerate().fold((0.0, 0.0), |(a, b), (i, v)| {
        let dx = i as f64 - mx;
        (a + dx * (v - my), b + dx * dx)
    });
    num / den
}

/// Largest Lyapunov exponent in s⁻¹.
pub fn lyapunov_max(series: &[f64], fs: f64, p: &EmbeddingParams) -> Result<f64> {
    let curve = divergence_curve(series, p)?;
    Ok(slope(&curve[p.fit.0..p.fit.1]) * fs)
}

/// x-component of the Lorenz system (σ = 10, ρ = 28, β = 8/3) by classical
/// RK4 from (1, 1, 1), after discarding a transient.
pub fn lorenz_x(n: usize, dt: f64, discard: usize) -> Vec<f64> {
    let f = |s: [f64; 3]| [10.0 * (s[1] - s[0]), s[0] * (28.0 - s[2]) - s[1], s[0] * s[1] - 8.0 / 3.0 * s[2]];
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let mut s = [1.0; 3];
    let mut out = Vec::with_capacity(n);
    for i in 0..n + discard {
        let k1 = f(s);
        let k2 = f(add(s, k1, dt / 2.0));
        let k3 = f(add(s, k2, dt / 2.0));
        let k4 = f(add(s, k3, dt));
        for d in 0..3 {
            s[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        if i >= discard {
            out.push(s[0]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    fn sine(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / 100.0).sin()).collect()
    }

    #[test]
    fn lorenz_trajectory_matches_reference() {
        let x = lorenz_x(8000, 0.01, 1000);
        assert!((x[0] - -4.798813269356856).abs() < 1e-9);
        assert!((x[7999] - -0.13471773878466775).abs() < 1e-6);
    }

    #[test]
    fn autocorrelation_delay() {
        // quarter period of a 0.97 Hz sine at 100 Hz
        assert_eq!(autocorrelation_zero(&sine(0.97, 4000)).unwrap(), 26);
        assert_eq!(autocorrelation_zero(&lorenz_x(8000, 0.01, 1000)).unwrap(), 295);
    }

    #[test]
    fn sine_has_zero_exponent() {
        let x = sine(0.97, 4000);
        let p = EmbeddingParams { dim: 5, delay: 26, evolve_steps: 200, min_separation: 100, fit: (0, 100) };
        assert!(lyapunov_max(&x, 100.0, &p).unwrap().abs() < 0.05);
    }

    #[test]
    fn lorenz_curve_matches_reference() {
        let x = lorenz_x(8000, 0.01, 1000);
        let p = EmbeddingParams { dim: 5, delay: 11, evolve_steps: 500, min_separation: 100, fit: (80, 250) };
        let curve = divergence_curve(&x, &p).unwrap();
        assert!((curve[0] - -1.2668020136909253).abs() < 1e-9);
        assert!((curve[100] - 0.3083247302549251).abs() < 1e-9);
        assert!((curve[499] - 2.8519062199152034).abs() < 1e-9);
        let sta = slope(&curve[80..250]) * 100.0;
        assert!((sta - 0.9256532168055283).abs() < 1e-9);
    }

    #[test]
    fn noise_diverges_fast() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = EmbeddingParams { dim: 5, delay: 1, evolve_steps: 20, min_separation: 10, fit: (0, 3) };
        assert!(lyapunov_max(&x, 100.0, &p).unwrap() > 1.0);
    }

    #[test]
    fn affine_invariant() {
        let x = lorenz_x(3000, 0.01, 1000);
        let y: Vec<f64> = x.iter().map(|v| -3.5 * v + 12.0).collect();
        let p = EmbeddingParams { dim: 5, delay: 11, evolve_steps: 200, min_separation: 100, fit: (20, 120) };
        let (a, b) = (lyapunov_max(&x, 100.0, &p).unwrap(), lyapunov_max(&y, 100.0, &p).unwrap());
        assert!((a - b).abs() <= 0.1 * a.abs());
    }

    #[test]
    fn short_series_rejected() {
        let p = EmbeddingParams { dim: 5, delay: 30, evolve_steps: 50, min_separation: 10, fit: (0, 10) };
        assert!(matches!(lyapunov_max(&sine(1.1, 200), 100.0, &p), Err(Error::Analysis(_))));
        let bad = EmbeddingParams { fit: (10, 11), ..p };
        assert!(matches!(bad.validate(10_000), Err(Error::Config(_))));
    }

    #[test]
    fn resolve_defaults() {
        let x = sine(0.97, 3000);
        let p = EmbeddingConfig::default().resolve(&x, 103.0).unwrap();
        assert_eq!(p, EmbeddingParams { dim: 5, delay: 26, evolve_steps: 103, min_separation: 103, fit: (0, 51) });
    }
}
