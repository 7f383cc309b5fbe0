use serde::{Deserialize, Serialize};

use crate::segmentation::GaitCycleSet;
use crate::{Error, Result};

/// Temporal parameters of one leg's cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spatiotemporal {
    /// Steps per second.
    pub sf: f64,
    /// Mean stride time (s).
    pub st: f64,
    /// Step time (s), half the stride time for single-leg data.
    pub stt: f64,
    pub stp: f64,
    pub swp: f64,
}

pub fn spatiotemporal(cycles: &GaitCycleSet) -> Result<Spatiotemporal> {
    if cycles.len() < 2 {
        return Err(Error::Analysis(format!("need at least 2 complete cycles, found {}", cycles.len())));
    }
    let n = cycles.len() as f64;
    let st = cycles.cycles.iter().map(|c| c.stride_duration).sum::<f64>() / n;
    let stp = cycles.cycles.iter().map(|c| c.stance_fraction()).sum::<f64>() / n;
    let stt = st / 2.0;
    Ok(Spatiotemporal { sf: 1.0 / stt, st, stt, stp, swp: 1.0 - stp })
}

/// Step time from both legs: mean interval from each heel strike of `a` to the
/// next heel strike of `b` and vice versa. Use in place of the half-stride
/// proxy when both shanks were recorded simultaneously.
pub fn step_time_bilateral(a: &GaitCycleSet, b: &GaitCycleSet) -> Result<f64> {
    let hs = |s: &GaitCycleSet| -> Vec<f64> {
        let mut t: Vec<f64> = s.cycles.iter().flat_map(|c| [c.heel_strike.t, c.next_heel_strike.t]).collect();
        t.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        t
    };
    let (ha, hb) = (hs(a), hs(b));
    let max_step = a.stride_durations().into_iter().chain(b.stride_durations()).fold(0.0, f64::max);
    let mut steps = Vec::new();
    for (from, to) in [(&ha, &hb), (&hb, &ha)] {
        for &t in from {
            if let Some(&next) = to.iter().find(|&&u| u > t) {
                if next - t < max_step {
                    steps.push(next - t);
                }
            }
        }
    }
    if steps.is_empty() {
        return Err(Error::Analysis("no overlapping heel strikes between the two legs".into()));
    }
    Ok(steps.iter().sum::<f64>() / steps.len() as f64)
}
