//! Single-source estimators used as references for the fused attitude.

use nalgebra::Vector3;

use super::kinematics::{accel_to_euler, body_to_euler_rates};
use super::{wrap_angle, EulerAngles, KinematicsFrame};
use crate::imu_io::ImuTrial;
use crate::Result;

/// Pure Euler-rate integration of the gyroscope from `x0`.
pub fn gyro_only(trial: &ImuTrial, x0: EulerAngles, frame: KinematicsFrame) -> Result<Vec<EulerAngles>> {
    let s = trial.samples();
    let mut out = Vec::with_capacity(s.len());
    let mut e = x0;
    out.push(e);
    for k in 1..s.len() {
        let dt = s[k].t - s[k - 1].t;
        let rates = body_to_euler_rates(&Vector3::from(s[k - 1].gyro), e, frame).map_err(|err| err.at_sample(k))?;
        e = EulerAngles::new(
            wrap_angle(e.roll + dt * rates[0]),
            e.pitch + dt * rates[1],
            wrap_angle(e.yaw + dt * rates[2]),
        );
        out.push(e);
    }
    Ok(out)
}

/// Tilt from gravity alone; unobservable samples hold the previous value and
/// yaw stays at zero.
pub fn accel_only(trial: &ImuTrial) -> Vec<EulerAngles> {
    let mut last = EulerAngles::ZERO;
    trial
        .samples()
        .iter()
        .map(|s| {
            if let Some((roll, pitch)) = accel_to_euler(&Vector3::from(s.acc)).tilt() {
                last = EulerAngles::new(roll, pitch, 0.0);
            }
            last
        })
        .collect()
}
