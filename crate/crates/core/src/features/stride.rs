use nalgebra::Vector3;

use super::nearest_index;
use crate::attitude::{direction_matrix, EulerSeries};
use crate::imu_io::ImuTrial;
use crate::segmentation::GaitCycleSet;
use crate::{Error, Result, GRAVITY};

/// Default bound on the drift-corrected velocity inside one stride (m/s).
pub const MAX_STRIDE_VELOCITY: f64 = 5.0;

/// Per-stride horizontal displacement between consecutive mid-stance
/// zero-velocity anchors.
///
/// Acceleration is rotated to the navigation frame with the estimated
/// attitude, gravity is removed, and velocity is integrated from rest at the
/// first anchor. The residual velocity at the second anchor is removed as a
/// linear drift before integrating position.
pub fn stride_lengths(
    trial: &ImuTrial,
    euler: &EulerSeries,
    cycles: &GaitCycleSet,
    max_velocity: f64,
) -> Result<Vec<f64>> {
    if cycles.is_empty() {
        return Err(Error::Analysis("no cycles for stride length".into()));
    }
    if euler.len() != trial.len() {
        return Err(Error::Validation(format!("attitude has {} samples, trial has {}", euler.len(), trial.len())));
    }
    let t = &euler.t;
    let acc_nav: Vec<Vector3<f64>> = trial
        .samples()
        .iter()
        .zip(&euler.angles)
        .map(|(s, e)| direction_matrix(*e) * Vector3::from(s.acc) - Vector3::new(0.0, 0.0, GRAVITY))
        .collect();

    let mut out = Vec::with_capacity(cycles.len());
    for (i, c) in cycles.cycles.iter().enumerate() {
        let next_mid = match cycles.cycles.get(i + 1) {
            Some(n) if n.heel_strike.sample_index == c.next_heel_strike.sample_index => n.mid_stance_t(),
            _ => c.next_heel_strike.t + 0.5 * c.stance_duration,
        };
        if next_mid > *t.last().unwrap_or(&f64::NEG_INFINITY) {
            continue;
        }
        let (a, b) = (nearest_index(t, c.mid_stance_t()), nearest_index(t, next_mid));
        if b <= a {
            continue;
        }
        out.push(integrate_stride(&t[a..=b], &acc_nav[a..=b], max_velocity)?);
    }
    if out.is_empty() {
        return Err(Error::Analysis("no stride has both zero-velocity anchors inside the recording".into()));
    }
    Ok(out)
}

fn integrate_stride(t: &[f64], acc: &[Vector3<f64>], max_velocity: f64) -> Result<f64> {
    let mut v = vec![Vector3::zeros(); t.len()];
    for k in 1..t.len() {
        v[k] = v[k - 1] + (acc[k - 1] + acc[k]) * (0.5 * (t[k] - t[k - 1]));
    }
    let span = t[t.len() - 1] - t[0];
    let drift = v[v.len() - 1];
    for (vk, tk) in v.iter_mut().zip(t) {
        *vk -= drift * ((tk - t[0]) / span);
        if vk.norm() > max_velocity {
            return Err(Error::Quality(format!(
                "stride velocity {:.2} m/s exceeds {max_velocity} m/s at t={tk:.3} s",
                vk.norm()
            )));
        }
    }
    let mut p = Vector3::zeros();
    for k in 1..t.len() {
        p += (v[k - 1] + v[k]) * (0.5 * (t[k] - t[k - 1]));
    }
    Ok(p.xy().norm())
}
