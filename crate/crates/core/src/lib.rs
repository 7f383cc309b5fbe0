//! Wearable-IMU gait assessment.
//!
//! The crate turns shank-mounted accelerometer and gyroscope recordings into a
//! twelve-parameter gait model and compares gait patterns statistically and with
//! classifiers. The processing chain is:
//!
//! 1. [`imu_io`]: CSV ingestion with unit normalisation (SI internally).
//! 2. [`preprocess`]: cropping, 3σ outlier masking, zero-phase Butterworth
//!    low-pass filtering and gap interpolation.
//! 3. [`attitude`]: Euler-angle estimation with a bank of adaptive Kalman
//!    filters fusing gyroscope rates with accelerometer gravity observations.
//! 4. [`segmentation`]: heel-strike / toe-off detection on the pitch trace.
//! 5. [`features`]: spatiotemporal parameters, variability, the largest
//!    Lyapunov exponent and knee-angle proxies.
//! 6. [`stats`] and [`ml`]: group comparisons and gait-pattern classification.
//!
//! [`synth`] generates trials with full ground truth so every stage can be
//! checked without clinical data.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod attitude;
pub mod config;
pub mod error;
pub mod export;
pub mod features;
pub mod imu_io;
pub mod ml;
pub mod pipeline;
pub mod preprocess;
pub mod run;
pub mod segmentation;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

/// Standard gravity in m/s².
pub const GRAVITY: f64 = 9.80665;
