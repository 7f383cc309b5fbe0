//! Signal conditioning: cropping, 3σ outlier masking, zero-phase Butterworth
//! low-pass filtering and linear gap interpolation.
//!
//! The trial pipeline runs in a fixed order: crop, outlier masking (per axis
//! and on the resultant acceleration), filtering, interpolation. Masked samples
//! are provisionally bridged before filtering so the recursion sees a uniform
//! time base, then re-interpolated from their filtered neighbours.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::imu_io::{ImuSample, ImuTrial};
use crate::{Error, Result};

/// Longest run of masked samples that may be bridged.
pub const MAX_GAP_S: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocConfig {
    pub outlier_sigma: f64,
    pub butter_order: usize,
    pub butter_cutoff_hz: f64,
    pub crop_start_s: Option<f64>,
    pub crop_end_s: Option<f64>,
    /// Masked runs longer than this are genuine excursions, not outliers,
    /// and are restored before filtering. `None` keeps every masked sample.
    pub max_outlier_run_s: Option<f64>,
}

impl Default for PreprocConfig {
    fn default() -> Self {
        Self {
            outlier_sigma: 3.0,
            butter_order: 4,
            butter_cutoff_hz: 10.0,
            crop_start_s: None,
            crop_end_s: None,
            max_outlier_run_s: Some(0.05),
        }
    }
}

impl PreprocConfig {
    pub fn crop(&self) -> Option<(f64, f64)> {
        match (self.crop_start_s, self.crop_end_s) {
            (None, None) => None,
            (s, e) => Some((s.unwrap_or(0.0), e.unwrap_or(f64::INFINITY))),
        }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if !(self.outlier_sigma > 0.0) {
            return Err(Error::Config("outlier_sigma must be positive".into()));
        }
        if self.butter_order == 0 || !self.butter_order.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "butter_order must be an even positive integer, got {}",
                self.butter_order
            )));
        }
        if !(self.butter_cutoff_hz > 0.0 && self.butter_cutoff_hz < sample_rate_hz / 2.0) {
            return Err(Error::Config(format!(
                "butter_cutoff_hz {} must lie in (0, {})",
                self.butter_cutoff_hz,
                sample_rate_hz / 2.0
            )));
        }
        if self.max_outlier_run_s.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::Config("max_outlier_run_s must be positive".into()));
        }
        Ok(())
    }

    fn max_run_samples(&self, sample_rate_hz: f64) -> Option<usize> {
        self.max_outlier_run_s.map(|r| (r * sample_rate_hz).round().max(1.0) as usize)
    }
}

/// Unmasks every run of consecutive masked samples longer than `max_run`,
/// restoring the original values.
pub fn release_long_runs(mask: &mut [Option<f64>], raw: &[f64], max_run: usize) {
    let mut i = 0;
    while i < mask.len() {
        if mask[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < mask.len() && mask[i].is_none() {
            i += 1;
        }
        if i - start > max_run {
            for k in start..i {
                mask[k] = Some(raw[k]);
            }
        }
    }
}

/// Resultant acceleration magnitude.
pub fn acc_magnitude(sample: &ImuSample) -> f64 {
    let [x, y, z] = sample.acc;
    (x * x + y * y + z * z).sqrt()
}

/// Keeps samples with `t_start <= t <= t_end` and re-zeroes time.
pub fn crop_straight_walk(trial: &ImuTrial, window: (f64, f64)) -> Result<ImuTrial> {
    let (t0, t1) = window;
    if !(t1 >= t0) {
        return Err(Error::Validation(format!("crop window [{t0}, {t1}] is empty")));
    }
    let kept: Vec<ImuSample> =
        trial.samples().iter().filter(|s| s.t >= t0 - 1e-9 && s.t <= t1 + 1e-9).copied().collect();
    let Some(first) = kept.first().map(|s| s.t) else {
        return Err(Error::Validation(format!("crop window [{t0}, {t1}] retains no samples")));
    };
    let samples = kept.into_iter().map(|s| ImuSample { t: s.t - first, ..s }).collect();
    trial.with_samples(samples)
}

fn mean_sd(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Masks samples further than `k_sigma` sample standard deviations from the
/// mean. Statistics are computed once over the whole input.
pub fn reject_outliers(series: &[f64], k_sigma: f64) -> Result<Vec<Option<f64>>> {
    if series.len() < 3 {
        return Err(Error::Validation("outlier rejection needs at least 3 samples".into()));
    }
    let (mean, sd) = mean_sd(series);
    if sd == 0.0 || !sd.is_finite() {
        return Ok(series.iter().map(|&x| Some(x)).collect());
    }
    let limit = k_sigma * sd;
    Ok(series.iter().map(|&x| if (x - mean).abs() > limit { None } else { Some(x) }).collect())
}

/// Second-order section, `a0` normalised to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, omega: f64) -> (f64, f64) {
        // H(e^{jw}) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
        let (c1, s1) = (omega.cos(), -omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), -(2.0 * omega).sin());
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = self.b[1] * s1 + self.b[2] * s2;
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = self.a[0] * s1 + self.a[1] * s2;
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }

    /// Transposed direct form II over `x`, starting from the steady state for a
    /// constant input equal to `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let dc = (b0 + b1 + b2) / (1.0 + a1 + a2);
        let y0 = dc * x0;
        let mut z2 = b2 * x0 - a2 * y0;
        let mut z1 = y0 - b0 * x0;
        for v in x.iter_mut() {
            let xin = *v;
            let y = b0 * xin + z1;
            z1 = b1 * xin - a1 * y + z2;
            z2 = b2 * xin - a2 * y;
            *v = y;
        }
    }
}

/// Digital Butterworth low-pass as a cascade of biquads, designed from the
/// analog prototype with a pre-warped bilinear transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthLowpass {
    pub sections: Vec<Biquad>,
    pub order: usize,
    pub fs: f64,
    pub fc: f64,
}

impl ButterworthLowpass {
    pub fn design(fs: f64, fc: f64, order: usize) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::Config(format!("Butterworth order must be even and positive, got {order}")));
        }
        if !(fs > 0.0 && fc > 0.0 && fc < fs / 2.0) {
            return Err(Error::Config(format!("cutoff {fc} Hz must lie in (0, {}) Hz", fs / 2.0)));
        }
        let w = (PI * fc / fs).tan();
        let w2 = w * w;
        let sections = (1..=order / 2)
            .map(|k| {
                // conjugate prototype pole pair at angle (2k-1)π/(2n) from the imaginary axis
                let q = 2.0 * ((2 * k - 1) as f64 * PI / (2 * order) as f64).sin();
                let norm = 1.0 + q * w + w2;
                let g = w2 / norm;
                Biquad { b: [g, 2.0 * g, g], a: [2.0 * (w2 - 1.0) / norm, (1.0 - q * w + w2) / norm] }
            })
            .collect();
        Ok(Self { sections, order, fs, fc })
    }

    /// Single-pass magnitude response at `f` Hz.
    pub fn magnitude(&self, f: f64) -> f64 {
        let omega = 2.0 * PI * f / self.fs;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(omega);
                (re * re + im * im).sqrt()
            })
            .product()
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        20.0 * self.magnitude(f).log10()
    }

    /// Causal single pass.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for s in &self.sections {
            s.run(&mut y);
        }
        y
    }

    /// Zero-phase forward-backward pass. The series is extended at both ends
    /// by odd reflection over `3 * order` samples, filtered, and trimmed.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let pad = 3 * self.order;
        if x.len() <= pad {
            return Err(Error::Config(format!(
                "series of length {} too short for order {} zero-phase filtering (need > {pad})",
                x.len(),
                self.order
            )));
        }
        let n = x.len();
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        let mut y = self.filter(&ext);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        Ok(y[pad..pad + n].to_vec())
    }
}

/// Zero-phase Butterworth low-pass of `series`.
pub fn butterworth_lowpass(series: &[f64], fs: f64, fc: f64, order: usize) -> Result<Vec<f64>> {
    ButterworthLowpass::design(fs, fc, order)?.filtfilt(series)
}

/// Linear interpolation over masked samples with hold extrapolation at the ends.
pub fn interpolate_gaps(series: &[Option<f64>], t: &[f64]) -> Result<Vec<f64>> {
    interpolate_gaps_within(series, t, MAX_GAP_S)
}

pub fn interpolate_gaps_within(series: &[Option<f64>], t: &[f64], max_gap_s: f64) -> Result<Vec<f64>> {
    if series.len() != t.len() {
        return Err(Error::Validation("series and time base differ in length".into()));
    }
    let known: Vec<usize> = series.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect();
    if known.len() < 2 {
        return Err(Error::Quality("fewer than 2 unmasked samples to interpolate from".into()));
    }
    let n = series.len();
    let value = |i: usize| series[i].expect("known index");
    let mut out = vec![0.0; n];
    let first = known[0];
    let last = *known.last().expect("non-empty");
    if first > 0 && t[first] - t[0] > max_gap_s {
        return Err(Error::Quality(format!("leading gap [{:.3}, {:.3}] s exceeds {max_gap_s} s", t[0], t[first])));
    }
    if last < n - 1 && t[n - 1] - t[last] > max_gap_s {
        return Err(Error::Quality(format!("trailing gap [{:.3}, {:.3}] s exceeds {max_gap_s} s", t[last], t[n - 1])));
    }
    out[..first].fill(value(first));
    out[last..].fill(value(last));
    for pair in known.windows(2) {
        let (i0, i1) = (pair[0], pair[1]);
        let (v0, v1) = (value(i0), value(i1));
        out[i0] = v0;
        if i1 > i0 + 1 {
            let span = t[i1] - t[i0];
            if span > max_gap_s {
                return Err(Error::Quality(format!("gap [{:.3}, {:.3}] s exceeds {max_gap_s} s", t[i0], t[i1])));
            }
            for (j, slot) in out.iter_mut().enumerate().take(i1).skip(i0 + 1) {
                let w = (t[j] - t[i0]) / span;
                *slot = v0 + w * (v1 - v0);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PreprocReport {
    /// Masked sample count per channel (ax, ay, az, gx, gy, gz).
    pub masked: [usize; 6],
    /// Samples whose resultant acceleration was an outlier.
    pub masked_magnitude: usize,
    pub cropped_from: usize,
}

/// Runs the full conditioning chain on one trial.
pub fn preprocess_trial(trial: &ImuTrial, cfg: &PreprocConfig) -> Result<(ImuTrial, PreprocReport)> {
    let fs = trial.meta.sample_rate_hz;
    cfg.validate(fs)?;
    let trial = match cfg.crop() {
        Some(w) => crop_straight_walk(trial, w)?,
        None => trial.clone(),
    };
    let t = trial.times();
    let mut report = PreprocReport { cropped_from: trial.len(), ..Default::default() };

    let magnitude: Vec<f64> = trial.samples().iter().map(acc_magnitude).collect();
    let max_run = cfg.max_run_samples(fs);
    let mut magnitude_mask = reject_outliers(&magnitude, cfg.outlier_sigma)?;
    if let Some(r) = max_run {
        release_long_runs(&mut magnitude_mask, &magnitude, r);
    }
    report.masked_magnitude = magnitude_mask.iter().filter(|m| m.is_none()).count();

    let filter = ButterworthLowpass::design(fs, cfg.butter_cutoff_hz, cfg.butter_order)?;
    let mut channels: Vec<Vec<f64>> = Vec::with_capacity(6);
    for ch in 0..6 {
        let raw: Vec<f64> = trial.samples().iter().map(|s| if ch < 3 { s.acc[ch] } else { s.gyro[ch - 3] }).collect();
        let mut masked = reject_outliers(&raw, cfg.outlier_sigma)?;
        if let Some(r) = max_run {
            release_long_runs(&mut masked, &raw, r);
        }
        if ch < 3 {
            for (m, mag) in masked.iter_mut().zip(&magnitude_mask) {
                if mag.is_none() {
                    *m = None;
                }
            }
        }
        report.masked[ch] = masked.iter().filter(|m| m.is_none()).count();
        let bridged = interpolate_gaps(&masked, &t)?;
        let filtered = filter.filtfilt(&bridged)?;
        let refit: Vec<Option<f64>> = filtered.iter().zip(&masked).map(|(&f, m)| m.map(|_| f)).collect();
        channels.push(interpolate_gaps(&refit, &t)?);
    }
    let samples = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| ImuSample {
            t: ti,
            acc: [channels[0][i], channels[1][i], channels[2][i]],
            gyro: [channels[3][i], channels[4][i], channels[5][i]],
        })
        .collect();
    Ok((trial.with_samples(samples)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imu_io::{Group, Leg, TrialMeta};
    use crate::GRAVITY;

    fn trial(n: usize) -> ImuTrial {
        let meta = TrialMeta { subject_id: "s".into(), leg: Leg::Left, group: Group::Control, sample_rate_hz: 100.0 };
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / 100.0;
                ImuSample { t, acc: [0.1 * (3.0 * t).sin(), 0.0, GRAVITY], gyro: [0.0, (2.0 * t).cos(), 0.0] }
            })
            .collect();
        ImuTrial::new(meta, samples).unwrap()
    }

    fn s(acc: [f64; 3]) -> ImuSample {
        ImuSample { t: 0.0, acc, gyro: [0.0; 3] }
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(acc_magnitude(&s([3.0, 4.0, 0.0])), 5.0);
        assert_eq!(acc_magnitude(&s([0.0, 0.0, 9.80665])), 9.80665);
        assert_eq!(acc_magnitude(&s([1.0, 2.0, 2.0])), 3.0);
    }

    #[test]
    fn crop_full_span_is_identity_up_to_rezero() {
        let tr = trial(500);
        let c = crop_straight_walk(&tr, (0.0, tr.duration())).unwrap();
        assert_eq!(c.samples(), tr.samples());
    }

    #[test]
    fn crop_one_second() {
        let tr = trial(500);
        let c = crop_straight_walk(&tr, (1.0, 2.0)).unwrap();
        assert!((99..=101).contains(&c.len()), "{}", c.len());
        assert_eq!(c.samples()[0].t, 0.0);
        assert!(crop_straight_walk(&tr, (20.0, 30.0)).is_err());
    }

    #[test]
    fn outlier_hand_example() {
        let out = reject_outliers(&[0.0, 0.0, 0.0, 0.0, 100.0], 3.0).unwrap();
        assert!(out.iter().all(Option::is_some));
        let out = reject_outliers(&[5.0; 10], 3.0).unwrap();
        assert!(out.iter().all(Option::is_some));
        assert!(reject_outliers(&[1.0, 2.0], 3.0).is_err());
    }

    #[test]
    fn outlier_masks_spike() {
        let mut x: Vec<f64> = (0..200).map(|i| (i as f64 * 0.3).sin()).collect();
        x[77] = 50.0;
        let out = reject_outliers(&x, 3.0).unwrap();
        let masked: Vec<usize> = out.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
        assert_eq!(masked, vec![77]);
    }

    #[test]
    fn butterworth_matches_tabulated_sos() {
        // scipy.signal.butter(4, 10, fs=100, output="sos")
        let f = ButterworthLowpass::design(100.0, 10.0, 4).unwrap();
        let gain: f64 = f.sections.iter().map(|s| s.b[0]).product();
        assert!((gain - 0.00482434335771623).abs() < 1e-14);
        let mut a: Vec<[f64; 2]> = f.sections.iter().map(|s| s.a).collect();
        a.sort_by(|x, y| x[1].total_cmp(&y[1]));
        let expected = [[-1.0485995763626117, 0.2961403575616696], [-1.3209134308194264, 0.6327387928852766]];
        for (got, want) in a.iter().zip(expected.iter()) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn magnitude_matches_prewarped_analog_prototype() {
        for &(fs, fc, order) in &[(100.0, 10.0, 4), (200.0, 30.0, 6), (100.0, 5.0, 2), (50.0, 20.0, 8)] {
            let f = ButterworthLowpass::design(fs, fc, order).unwrap();
            let wc = (PI * fc / fs).tan();
            for i in 1..50 {
                let freq = i as f64 * (fs / 2.0) / 50.0;
                let w = (PI * freq / fs).tan();
                let analog = 1.0 / (1.0 + (w / wc).powi(2 * order as i32)).sqrt();
                assert!((f.magnitude(freq) - analog).abs() < 1e-10, "fs={fs} fc={fc} n={order} f={freq}");
            }
        }
    }

    #[test]
    fn cutoff_and_stopband() {
        let f = ButterworthLowpass::design(100.0, 10.0, 4).unwrap();
        assert!((f.magnitude(10.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01);
        assert!(f.magnitude_db(40.0) <= -40.0);
    }

    #[test]
    fn dc_is_preserved() {
        let x = vec![3.25; 100];
        let y = butterworth_lowpass(&x, 100.0, 10.0, 4).unwrap();
        assert!(y.iter().all(|v| (v - 3.25).abs() < 1e-12));
    }

    #[test]
    fn filter_preconditions() {
        assert!(butterworth_lowpass(&[1.0; 12], 100.0, 10.0, 4).is_err());
        assert!(butterworth_lowpass(&[1.0; 100], 100.0, 50.0, 4).is_err());
        assert!(butterworth_lowpass(&[1.0; 100], 100.0, 10.0, 3).is_err());
    }

    #[test]
    fn zero_phase_peak_lag() {
        let x: Vec<f64> = (0..1000)
            .map(|i| {
                let t = i as f64 / 100.0;
                (2.0 * PI * 1.3 * t).sin() + 0.5 * (2.0 * PI * 3.1 * t + 0.4).sin()
            })
            .collect();
        let y = butterworth_lowpass(&x, 100.0, 10.0, 4).unwrap();
        let xcorr = |lag: i64| -> f64 { (100..900).map(|i| x[i] * y[(i as i64 + lag) as usize]).sum() };
        let best = (-20..=20).max_by(|a, b| xcorr(*a).total_cmp(&xcorr(*b))).unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn interpolation_examples() {
        let t = [0.0, 0.01, 0.02];
        assert_eq!(interpolate_gaps(&[Some(0.0), None, Some(2.0)], &t).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(interpolate_gaps(&[Some(0.0), Some(5.0), Some(2.0)], &t).unwrap(), vec![0.0, 5.0, 2.0]);
        let held = interpolate_gaps(&[None, Some(1.0), Some(2.0)], &t).unwrap();
        assert_eq!(held, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn masked_ramp_is_exact() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let masked: Vec<Option<f64>> = t
            .iter()
            .enumerate()
            .map(|(i, &ti)| if i % 7 == 3 || (40..55).contains(&i) { None } else { Some(2.0 * ti - 1.0) })
            .collect();
        let out = interpolate_gaps(&masked, &t).unwrap();
        for (o, &ti) in out.iter().zip(&t) {
            assert!((o - (2.0 * ti - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn long_gap_is_quality_error() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let masked: Vec<Option<f64>> = (0..100).map(|i| if (10..50).contains(&i) { None } else { Some(1.0) }).collect();
        assert!(matches!(interpolate_gaps(&masked, &t), Err(Error::Quality(_))));
    }

    #[test]
    fn pipeline_keeps_length_and_time_base() {
        let tr = trial(600);
        let (out, report) = preprocess_trial(&tr, &PreprocConfig::default()).unwrap();
        assert_eq!(out.len(), tr.len());
        assert_eq!(out.times(), tr.times());
        assert_eq!(report.masked_magnitude, 0);
    }

    #[test]
    fn pipeline_rejects_odd_order() {
        let cfg = PreprocConfig { butter_order: 3, ..Default::default() };
        assert!(matches!(preprocess_trial(&trial(600), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_masked_fraction() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let masked = reject_outliers(&x, 3.0).unwrap().iter().filter(|m| m.is_none()).count();
        assert!((masked as f64 / 1e4 - 0.0027).abs() <= 0.002, "{masked}");
    }

    #[test]
    fn long_runs_are_released() {
        let raw = [0.0, 9.0, 0.0, 9.0, 9.0, 9.0, 0.0];
        let mut mask: Vec<Option<f64>> = raw.iter().map(|&x| if x > 1.0 { None } else { Some(x) }).collect();
        release_long_runs(&mut mask, &raw, 2);
        assert_eq!(mask, vec![Some(0.0), None, Some(0.0), Some(9.0), Some(9.0), Some(9.0), Some(0.0)]);
    }

    #[test]
    fn second_pass_changes_little() {
        let tr = trial(1000);
        let cfg = PreprocConfig::default();
        let (once, _) = preprocess_trial(&tr, &cfg).unwrap();
        let (twice, _) = preprocess_trial(&once, &cfg).unwrap();
        let ch = |t: &ImuTrial| t.samples().iter().map(|s| s.gyro[1]).collect::<Vec<f64>>();
        let (a, b) = (ch(&once), ch(&twice));
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(rms(&diff) < 0.01 * rms(&a));
    }

    proptest::proptest! {
        #[test]
        fn filtfilt_is_linear(
            x in proptest::collection::vec(-5.0..5.0f64, 64),
            y in proptest::collection::vec(-5.0..5.0f64, 64),
            a in -3.0..3.0f64,
            b in -3.0..3.0f64,
        ) {
            let f = ButterworthLowpass::design(100.0, 10.0, 4).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = f.filtfilt(&mix).unwrap();
            let (fx, fy) = (f.filtfilt(&x).unwrap(), f.filtfilt(&y).unwrap());
            for i in 0..lhs.len() {
                proptest::prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
            }
        }
    }
}
