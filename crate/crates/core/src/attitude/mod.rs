//! Shank attitude estimation.
//!
//! Body-frame angular rates drive a bank of Kalman filters whose state is the
//! Euler triple (roll, pitch, yaw) with Euler rates as the control input.
//! Gravity seen by the accelerometer observes roll and pitch; yaw has no
//! absolute reference and follows the integrated rates.

mod bank;
mod baseline;
mod estimator;
mod kalman;
mod kinematics;

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use bank::{bank_fuse, BankStep, FilterBank, FusedEstimate};
pub use baseline::{accel_only, gyro_only};
pub use estimator::{estimate_attitude, initial_attitude, FusionDiagnostics};
pub use kalman::{
    adapt_noise, innovation, kf_predict, kf_update, InnovationWindow, KalmanState, NoiseNominal, UpdateOutcome,
};
pub use kinematics::{
    accel_to_euler, body_to_enu_rates, body_to_euler_rates, direction_matrix, enu_to_body_rates, euler_rate_matrix,
    euler_rates, euler_rates_to_body, gravity_in_body, Observation, GIMBAL_MARGIN,
};

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub const ZERO: Self = Self { roll: 0.0, pitch: 0.0, yaw: 0.0 };

    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self { roll: v[0], pitch: v[1], yaw: v[2] }
    }

    /// Roll and yaw wrapped to (−π, π]; pitch left as is.
    pub fn wrapped(self) -> Self {
        Self { roll: wrap_angle(self.roll), pitch: wrap_angle(self.pitch), yaw: wrap_angle(self.yaw) }
    }

    pub fn in_principal_range(self) -> bool {
        let half = PI / 2.0;
        self.roll > -PI
            && self.roll <= PI
            && self.pitch > -half
            && self.pitch < half
            && self.yaw > -PI
            && self.yaw <= PI
    }
}

/// Which rates feed the Euler-rate kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KinematicsFrame {
    /// Body rates are first rotated into the navigation frame by the direction
    /// matrix, and the Euler-rate relation is applied to the rotated rates.
    #[default]
    NavFrame,
    /// The textbook relation: the Euler-rate matrix acts on body rates directly.
    BodyRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub bank_size: usize,
    pub gates_sigma: Vec<f64>,
    /// Rate random walk in °/√s; per-step variance is `q² · dt`.
    pub q_nominal_deg: f64,
    pub r_nominal_deg: f64,
    pub adapt_window: usize,
    pub adaptive: bool,
    pub init_window_s: f64,
    pub init_p_deg: f64,
    pub r_floor_deg: f64,
    /// Yaw observation variance (rad²); effectively infinite.
    pub yaw_r: f64,
    pub kinematics_frame: KinematicsFrame,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            bank_size: 3,
            gates_sigma: vec![2.0, 3.0, 4.0],
            q_nominal_deg: 0.5,
            r_nominal_deg: 2.0,
            adapt_window: 50,
            adaptive: true,
            init_window_s: 0.5,
            init_p_deg: 5.0,
            r_floor_deg: 0.05,
            yaw_r: 1e10,
            kinematics_frame: KinematicsFrame::NavFrame,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bank_size == 0 {
            return Err(Error::Config("bank_size must be at least 1".into()));
        }
        if self.gates_sigma.len() != self.bank_size {
            return Err(Error::Config(format!(
                "gates_sigma has {} entries but bank_size is {}",
                self.gates_sigma.len(),
                self.bank_size
            )));
        }
        if self.gates_sigma.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config("gates_sigma entries must be positive".into()));
        }
        if !(self.q_nominal_deg >= 0.0 && self.r_nominal_deg > 0.0 && self.init_p_deg >= 0.0) {
            return Err(Error::Config("noise levels must be non-negative (r_nominal_deg positive)".into()));
        }
        if self.adapt_window < 10 {
            return Err(Error::Config("adapt_window must be at least 10".into()));
        }
        if !(self.init_window_s > 0.0) {
            return Err(Error::Config("init_window_s must be positive".into()));
        }
        Ok(())
    }
}

/// Fused attitude per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerSeries {
    pub t: Vec<f64>,
    pub angles: Vec<EulerAngles>,
    /// Norm of the roll/pitch innovation against the common prediction (rad);
    /// zero where no observation was available.
    pub innovation_norm: Vec<f64>,
    pub diagnostics: FusionDiagnostics,
}

impl EulerSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn roll(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.roll).collect()
    }

    pub fn pitch(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.pitch).collect()
    }

    pub fn yaw(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.yaw).collect()
    }

    /// Series from plain angles, e.g. ground truth or a baseline estimator.
    pub fn from_angles(t: Vec<f64>, angles: Vec<EulerAngles>) -> Self {
        let n = t.len();
        Self { t, angles, innovation_norm: vec![0.0; n], diagnostics: FusionDiagnostics::default() }
    }
}

/// Root-mean-square angular difference per axis (roll, pitch, yaw), wrapped.
pub fn rmse(a: &[EulerAngles], b: &[EulerAngles]) -> [f64; 3] {
    let n = a.len().min(b.len()).max(1) as f64;
    let mut acc = [0.0; 3];
    for (x, y) in a.iter().zip(b) {
        acc[0] += wrap_angle(x.roll - y.roll).powi(2);
        acc[1] += wrap_angle(x.pitch - y.pitch).powi(2);
        acc[2] += wrap_angle(x.yaw - y.yaw).powi(2);
    }
    acc.map(|s| (s / n).sqrt())
}
