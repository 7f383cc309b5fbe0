use nalgebra::{Matrix3, Vector3};

use super::{EulerAngles, KinematicsFrame};
use crate::{Error, Result, GRAVITY};

/// Minimum |cos θ| before the Euler-rate relation is considered singular.
pub const GIMBAL_MARGIN: f64 = 1e-3;

/// ZYX direction matrix (body → navigation), `Rz(ψ)·Ry(θ)·Rx(φ)`.
pub fn direction_matrix(e: EulerAngles) -> Matrix3<f64> {
    let (sf, cf) = e.roll.sin_cos();
    let (st, ct) = e.pitch.sin_cos();
    let (sp, cp) = e.yaw.sin_cos();
    Matrix3::new(
        ct * cp,
        -cf * sp + sf * st * cp,
        sf * sp + cf * st * cp,
        ct * sp,
        cf * cp + sf * st * sp,
        -sf * cp + cf * st * sp,
        -st,
        sf * ct,
        cf * ct,
    )
}

fn gimbal_check(e: EulerAngles) -> Result<()> {
    if e.pitch.cos() < GIMBAL_MARGIN || e.pitch.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::numeric(None, format!("pitch {:.6} rad is at the gimbal limit", e.pitch)));
    }
    Ok(())
}

/// Rotates body rates (p, q, r) into the navigation frame.
pub fn body_to_enu_rates(gyro: &Vector3<f64>, e: EulerAngles) -> Result<Vector3<f64>> {
    gimbal_check(e)?;
    Ok(direction_matrix(e) * gyro)
}

/// Inverse of [`body_to_enu_rates`].
pub fn enu_to_body_rates(gyro_enu: &Vector3<f64>, e: EulerAngles) -> Vector3<f64> {
    direction_matrix(e).transpose() * gyro_enu
}

/// Matrix mapping the rate triple to (φ̇, θ̇, ψ̇).
pub fn euler_rate_matrix(e: EulerAngles) -> Result<Matrix3<f64>> {
    let ct = e.pitch.cos();
    if ct < GIMBAL_MARGIN {
        return Err(Error::numeric(None, format!("cos(pitch) = {ct:.3e} below gimbal margin")));
    }
    let (sf, cf) = e.roll.sin_cos();
    let tt = e.pitch.sin() / ct;
    Ok(Matrix3::new(1.0, sf * tt, cf * tt, 0.0, cf, -sf, 0.0, sf / ct, cf / ct))
}

/// Euler-angle rates from the rate triple in the frame the kinematics act on.
pub fn euler_rates(gyro_enu: &Vector3<f64>, e: EulerAngles) -> Result<Vector3<f64>> {
    Ok(euler_rate_matrix(e)? * gyro_enu)
}

/// Euler-angle rates from raw body rates under the selected frame convention.
pub fn body_to_euler_rates(gyro: &Vector3<f64>, e: EulerAngles, frame: KinematicsFrame) -> Result<Vector3<f64>> {
    match frame {
        KinematicsFrame::NavFrame => euler_rates(&body_to_enu_rates(gyro, e)?, e),
        KinematicsFrame::BodyRates => euler_rates(gyro, e),
    }
}

/// Body rates that produce the given Euler rates; inverse of [`body_to_euler_rates`].
pub fn euler_rates_to_body(rates: &Vector3<f64>, e: EulerAngles, frame: KinematicsFrame) -> Vector3<f64> {
    let (sf, cf) = e.roll.sin_cos();
    let (st, ct) = e.pitch.sin_cos();
    let inv = Matrix3::new(1.0, 0.0, -st, 0.0, cf, sf * ct, 0.0, -sf, cf * ct);
    let w = inv * rates;
    match frame {
        KinematicsFrame::NavFrame => enu_to_body_rates(&w, e),
        KinematicsFrame::BodyRates => w,
    }
}

/// Specific force of a motionless sensor at attitude `e`.
pub fn gravity_in_body(e: EulerAngles) -> Vector3<f64> {
    direction_matrix(e).transpose() * Vector3::new(0.0, 0.0, GRAVITY)
}

/// Tilt observation from the accelerometer. Yaw is never observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Tilt {
        roll: f64,
        pitch: f64,
    },
    /// |acc| below half a g: gravity direction not measurable.
    Freefall,
    /// Pitch at ±90°, where roll is undefined.
    GimbalLimit {
        pitch: f64,
    },
}

impl Observation {
    pub fn tilt(self) -> Option<(f64, f64)> {
        match self {
            Observation::Tilt { roll, pitch } => Some((roll, pitch)),
            _ => None,
        }
    }
}

pub fn accel_to_euler(acc: &Vector3<f64>) -> Observation {
    if acc.norm() <= 0.5 * GRAVITY {
        return Observation::Freefall;
    }
    let roll = acc[1].atan2(acc[2]);
    let pitch = (-acc[0]).atan2((acc[1] * acc[1] + acc[2] * acc[2]).sqrt());
    if pitch.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
        return Observation::GimbalLimit { pitch };
    }
    Observation::Tilt { roll, pitch }
}
