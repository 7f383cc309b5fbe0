//! The twelve-parameter gait model.

mod knee;
mod lyapunov;
mod spatiotemporal;
mod stride;
mod variability;

use serde::{Deserialize, Serialize};

pub use knee::{knee_angles, KneeAngles};
pub use lyapunov::{
    autocorrelation_zero, divergence_curve, lorenz_x, lyapunov_max, slope, EmbeddingConfig, EmbeddingParams,
    MIN_EMBEDDED_POINTS,
};
pub use spatiotemporal::{spatiotemporal, step_time_bilateral, Spatiotemporal};
pub use stride::{stride_lengths, MAX_STRIDE_VELOCITY};
pub use variability::variability;

use crate::attitude::EulerSeries;
use crate::imu_io::ImuTrial;
use crate::segmentation::GaitCycleSet;
use crate::{Error, Result};

/// Column order used everywhere features are tabulated.
pub const FEATURE_NAMES: [&str; 12] = ["SF", "SL", "SS", "STT", "ST", "STP", "SWP", "SV", "STV", "STA", "WQK", "BDK"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct GaitFeatureVector {
    /// Steps per second.
    pub sf: f64,
    /// Stride length (m).
    pub sl: f64,
    /// Stride speed (m/s).
    pub ss: f64,
    /// Step time (s).
    pub stt: f64,
    /// Stride time (s).
    pub st: f64,
    /// Stance fraction.
    pub stp: f64,
    /// Swing fraction.
    pub swp: f64,
    /// Stride-length variability.
    pub sv: f64,
    /// Stride-time variability.
    pub stv: f64,
    /// Largest Lyapunov exponent of pitch per stride (dimensionless).
    pub sta: f64,
    /// Early-stance knee flexion proxy (deg).
    pub wqk: f64,
    /// Swing knee excursion proxy (deg).
    pub bdk: f64,
}

impl GaitFeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.sf, self.sl, self.ss, self.stt, self.st, self.stp, self.swp, self.sv, self.stv, self.sta, self.wqk,
            self.bdk,
        ]
    }

    pub fn from_array(v: [f64; 12]) -> Self {
        let [sf, sl, ss, stt, st, stp, swp, sv, stv, sta, wqk, bdk] = v;
        Self { sf, sl, ss, stt, st, stp, swp, sv, stv, sta, wqk, bdk }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| n.eq_ignore_ascii_case(name)).map(|i| self.to_array()[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub embedding: EmbeddingConfig,
    /// Early stance as a fraction of stance, for the flexion proxy.
    pub early_stance_fraction: f64,
    /// Velocity bound flagging stride integration divergence (m/s).
    pub max_stride_velocity: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            embedding: EmbeddingConfig::default(),
            early_stance_fraction: 0.25,
            max_stride_velocity: MAX_STRIDE_VELOCITY,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.early_stance_fraction > 0.0 && self.early_stance_fraction <= 1.0) {
            return Err(Error::Config(format!("early_stance_fraction {} outside (0, 1]", self.early_stance_fraction)));
        }
        if !(self.max_stride_velocity > 0.0) {
            return Err(Error::Config("max_stride_velocity must be positive".into()));
        }
        Ok(())
    }
}

/// Per-stride streams behind the variability features.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrideStreams {
    pub stride_lengths: Vec<f64>,
    pub stride_times: Vec<f64>,
}

/// Assembles all twelve features for one trial. `trial` must be the
/// preprocessed trial the attitude was estimated from.
pub fn feature_vector(
    trial: &ImuTrial,
    euler: &EulerSeries,
    cycles: &GaitCycleSet,
    cfg: &FeatureConfig,
) -> Result<(GaitFeatureVector, StrideStreams)> {
    cfg.validate()?;
    let temporal = spatiotemporal(cycles).map_err(|e| e.in_feature("ST"))?;
    let lengths = stride_lengths(trial, euler, cycles, cfg.max_stride_velocity).map_err(|e| e.in_feature("SL"))?;
    let sl = lengths.iter().sum::<f64>() / lengths.len() as f64;
    let times = cycles.stride_durations();
    let sv = variability(&lengths).map_err(|e| e.in_feature("SV"))?;
    let stv = variability(&times).map_err(|e| e.in_feature("STV"))?;
    let sta =
        gait_lyapunov(euler, cycles, trial.meta.sample_rate_hz, &cfg.embedding).map_err(|e| e.in_feature("STA"))?;
    let knee = knee_angles(euler, cycles, cfg.early_stance_fraction).map_err(|e| e.in_feature("WQK"))?;
    let v = GaitFeatureVector {
        sf: temporal.sf,
        sl,
        ss: sl / temporal.st,
        stt: temporal.stt,
        st: temporal.st,
        stp: temporal.stp,
        swp: temporal.swp,
        sv,
        stv,
        sta,
        wqk: knee.wqk,
        bdk: knee.bdk,
    };
    Ok((v, StrideStreams { stride_lengths: lengths, stride_times: times }))
}

/// Lyapunov exponent of the pitch trace between the first and last detected
/// heel strike, with the mean stride as the period, expressed per stride
/// (s⁻¹ times the mean stride time).
///
/// Per-second values fall with stride time for otherwise identical gait,
/// which would rank slow walkers as more stable; scaling by the stride keeps
/// the exponent comparable across cadences.
pub fn gait_lyapunov(euler: &EulerSeries, cycles: &GaitCycleSet, fs: f64, cfg: &EmbeddingConfig) -> Result<f64> {
    let (first, last) = match (cycles.cycles.first(), cycles.cycles.last()) {
        (Some(a), Some(b)) => (a.heel_strike.t, b.next_heel_strike.t),
        _ => return Err(Error::Analysis("no cycles for the Lyapunov exponent".into())),
    };
    let (a, b) = (nearest_index(&euler.t, first), nearest_index(&euler.t, last));
    let pitch: Vec<f64> = euler.angles[a..=b].iter().map(|e| e.pitch).collect();
    let stride = cycles.stride_durations().iter().sum::<f64>() / cycles.len() as f64;
    let params = cfg.resolve(&pitch, stride * fs)?;
    Ok(lyapunov_max(&pitch, fs, &params)? * stride)
}

/// Index of the sample closest to `x` in an increasing time base.
pub(crate) fn nearest_index(t: &[f64], x: f64) -> usize {
    match t.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i >= t.len() => t.len() - 1,
        Err(i) => {
            if x - t[i - 1] <= t[i] - x {
                i - 1
            } else {
                i
            }
        }
    }
}
