//! Browser demo: three small entry points over the gaitkit core, each taking
//! plain numbers or text and returning a JSON string for the page to plot.
//!
//! The `*_json` functions hold the logic and are tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use gaitkit::attitude::{accel_only, EulerAngles};
use gaitkit::features::FEATURE_NAMES;
use gaitkit::imu_io::Group;
use gaitkit::pipeline::{analyze_trial, AnalysisConfig};
use gaitkit::preprocess::ButterworthLowpass;
use gaitkit::segmentation::{EventKind, GaitEvent};
use gaitkit::stats::{shapiro_wilk, two_sample, StatsConfig};
use gaitkit::synth::{default_meta, generate_trial, GaitProfile};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Response {
    pub freq_hz: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    pub at_cutoff_db: f64,
}

/// Single-pass magnitude response of the Butterworth low-pass on a linear
/// grid from 0 to Nyquist.
pub fn filter_response_json(fs: f64, fc: f64, order: usize, points: usize) -> Result<String, String> {
    let f = ButterworthLowpass::design(fs, fc, order).map_err(|e| e.to_string())?;
    let points = points.clamp(2, 4096);
    let freq_hz: Vec<f64> = (0..points).map(|i| i as f64 * (fs / 2.0) / (points - 1) as f64).collect();
    // clamp the stop-band so the plot keeps a sensible floor
    let magnitude_db = freq_hz.iter().map(|&x| f.magnitude_db(x).max(-200.0)).collect();
    let r = Response { freq_hz, magnitude_db, at_cutoff_db: f.magnitude_db(fc) };
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Walk {
    pub t: Vec<f64>,
    pub pitch_true_deg: Vec<f64>,
    pub pitch_fused_deg: Vec<f64>,
    pub pitch_accel_deg: Vec<f64>,
    pub heel_strikes: Vec<f64>,
    pub toe_offs: Vec<f64>,
    pub true_heel_strikes: Vec<f64>,
    pub features: Vec<(String, f64)>,
}

fn pitch_deg(a: &[EulerAngles]) -> Vec<f64> {
    a.iter().map(|e| e.pitch.to_degrees()).collect()
}

fn times(events: &[GaitEvent], kind: EventKind) -> Vec<f64> {
    events.iter().filter(|e| e.kind == kind).map(|e| e.t).collect()
}

/// Synthesises one trial of `group` (`H`, `LDHH` or `LDHE`), runs the full
/// per-trial analysis and returns true, fused and accelerometer-only pitch
/// with the detected events and the feature vector.
pub fn simulate_walk_json(
    group: &str,
    seconds: f64,
    noise_scale: f64,
    gyro_bias_deg: f64,
    seed: u32,
) -> Result<String, String> {
    let group: Group = group.parse().map_err(|e: gaitkit::Error| e.to_string())?;
    if noise_scale.is_nan() || noise_scale < 0.0 {
        return Err("noise scale must be non-negative".into());
    }
    let base = GaitProfile::reference(group);
    let profile = GaitProfile {
        gyro_noise_sd: base.gyro_noise_sd * noise_scale,
        acc_noise_sd: base.acc_noise_sd * noise_scale,
        gyro_bias: gyro_bias_deg.to_radians(),
        seed: u64::from(seed),
        ..base
    };
    let (trial, truth) = generate_trial(&profile, seconds, default_meta(group)).map_err(|e| e.to_string())?;
    let a = analyze_trial(&trial, &AnalysisConfig::default()).map_err(|e| e.to_string())?;
    let w = Walk {
        t: trial.times(),
        pitch_true_deg: pitch_deg(&truth.euler),
        pitch_fused_deg: pitch_deg(&a.euler.angles),
        pitch_accel_deg: pitch_deg(&accel_only(&trial)),
        heel_strikes: times(&a.events, EventKind::HeelStrike),
        toe_offs: times(&a.events, EventKind::ToeOff),
        true_heel_strikes: truth.heel_strikes(),
        features: FEATURE_NAMES.iter().map(|n| n.to_string()).zip(a.features.to_array()).collect(),
    };
    serde_json::to_string(&w).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub n: [usize; 2],
    pub normality_p: [Option<f64>; 2],
    pub test: String,
    pub statistic: f64,
    pub p: f64,
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect()
}

/// Compares two samples typed as comma- or space-separated numbers using the
/// same test selection as the group comparison report.
pub fn compare_samples_json(a: &str, b: &str) -> Result<String, String> {
    let (a, b) = (parse_numbers(a)?, parse_numbers(b)?);
    let (test, statistic, p) = two_sample(&a, &b, &StatsConfig::default()).map_err(|e| e.to_string())?;
    let c = Comparison {
        n: [a.len(), b.len()],
        normality_p: [shapiro_wilk(&a).ok().map(|r| r.p), shapiro_wilk(&b).ok().map(|r| r.p)],
        test,
        statistic,
        p,
    };
    serde_json::to_string(&c).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn filter_response(fs: f64, fc: f64, order: usize, points: usize) -> Result<String, JsError> {
    filter_response_json(fs, fc, order, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate_walk(
    group: &str,
    seconds: f64,
    noise_scale: f64,
    gyro_bias_deg: f64,
    seed: u32,
) -> Result<String, JsError> {
    simulate_walk_json(group, seconds, noise_scale, gyro_bias_deg, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare_samples(a: &str, b: &str) -> Result<String, JsError> {
    compare_samples_json(a, b).map_err(|e| JsError::new(&e))
}
