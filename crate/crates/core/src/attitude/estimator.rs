use nalgebra::Vector3;
use serde::Serialize;

use super::bank::FilterBank;
use super::kinematics::{accel_to_euler, body_to_euler_rates, Observation};
use super::{EulerAngles, EulerSeries, FusionConfig};
use crate::imu_io::ImuTrial;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FusionDiagnostics {
    /// Steps where every filter rejected the observation.
    pub all_gated_steps: usize,
    /// Steps without a usable tilt observation (free fall or vertical limb).
    pub unobserved_steps: usize,
    /// Mean bank weights over steps where at least one filter accepted.
    pub mean_weights: Vec<f64>,
}

fn acc_vec(s: &crate::imu_io::ImuSample) -> Vector3<f64> {
    Vector3::from(s.acc)
}

/// Initial attitude from the mean accelerometer vector over the first
/// `init_window_s` seconds; yaw starts at zero.
pub fn initial_attitude(trial: &ImuTrial, cfg: &FusionConfig) -> Result<EulerAngles> {
    let samples = trial.samples();
    let t0 = samples.first().map(|s| s.t).ok_or_else(|| Error::Validation("empty trial".into()))?;
    let window: Vec<Vector3<f64>> = samples.iter().take_while(|s| s.t < t0 + cfg.init_window_s).map(acc_vec).collect();
    let mean = window.iter().sum::<Vector3<f64>>() / window.len().max(1) as f64;
    match accel_to_euler(&mean) {
        Observation::Tilt { roll, pitch } => Ok(EulerAngles::new(roll, pitch, 0.0)),
        other => Err(Error::numeric(Some(0), format!("initial attitude not observable ({other:?})"))),
    }
}

/// Fuses gyroscope and accelerometer into an Euler-angle series.
pub fn estimate_attitude(trial: &ImuTrial, cfg: &FusionConfig) -> Result<EulerSeries> {
    cfg.validate()?;
    let samples = trial.samples();
    let x0 = initial_attitude(trial, cfg)?;
    let mut bank = FilterBank::new(x0.to_vector(), cfg, 1.0 / trial.meta.sample_rate_hz)?;
    let mut angles = Vec::with_capacity(samples.len());
    let mut innovation_norm = Vec::with_capacity(samples.len());
    angles.push(x0);
    innovation_norm.push(0.0);
    let mut diag = FusionDiagnostics { mean_weights: vec![0.0; cfg.bank_size], ..Default::default() };
    let mut weighted_steps = 0usize;

    for k in 1..samples.len() {
        let dt = samples[k].t - samples[k - 1].t;
        let prev = EulerAngles::from_vector(&bank.estimate());
        let u = body_to_euler_rates(&Vector3::from(samples[k - 1].gyro), prev, cfg.kinematics_frame)
            .map_err(|e| e.at_sample(k))?;
        let tilt = accel_to_euler(&acc_vec(&samples[k])).tilt();
        let step = bank.step(&u, dt, tilt).map_err(|e| e.at_sample(k))?;
        if !step.observed {
            diag.unobserved_steps += 1;
        } else if step.all_gated {
            diag.all_gated_steps += 1;
        } else {
            weighted_steps += 1;
            for (m, w) in diag.mean_weights.iter_mut().zip(&step.weights) {
                *m += w;
            }
        }
        let e = EulerAngles::from_vector(&step.fused);
        if !e.pitch.is_finite() || !e.roll.is_finite() {
            return Err(Error::numeric(Some(k), "non-finite attitude estimate"));
        }
        angles.push(e);
        innovation_norm.push((step.innovation[0].powi(2) + step.innovation[1].powi(2)).sqrt());
    }
    if weighted_steps > 0 {
        diag.mean_weights.iter_mut().for_each(|m| *m /= weighted_steps as f64);
    }
    Ok(EulerSeries { t: trial.times(), angles, innovation_norm, diagnostics: diag })
}
