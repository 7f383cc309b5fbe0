use super::nearest_index;
use crate::attitude::EulerSeries;
use crate::segmentation::GaitCycleSet;
use crate::{Error, Result};

/// Knee-angle proxies from one shank sensor, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneeAngles {
    /// Mean over strides of the largest early-stance pitch excursion.
    pub wqk: f64,
    /// Mean over strides of the largest swing roll excursion.
    pub bdk: f64,
}

/// Both excursions are measured against the attitude at the stride's
/// mid-stance. Early stance spans the first `early_fraction` of stance.
pub fn knee_angles(euler: &EulerSeries, cycles: &GaitCycleSet, early_fraction: f64) -> Result<KneeAngles> {
    if cycles.is_empty() {
        return Err(Error::Analysis("no cycles for knee angles".into()));
    }
    let t = &euler.t;
    let (mut wqk, mut bdk) = (0.0, 0.0);
    for c in &cycles.cycles {
        let reference = euler.angles[nearest_index(t, c.mid_stance_t())];
        let hs = nearest_index(t, c.heel_strike.t);
        let early_end = nearest_index(t, c.heel_strike.t + early_fraction * c.stance_duration);
        let to = nearest_index(t, c.toe_off.t);
        let next = nearest_index(t, c.next_heel_strike.t);
        wqk += euler.angles[hs..=early_end].iter().map(|e| (e.pitch - reference.pitch).abs()).fold(0.0, f64::max);
        bdk += euler.angles[to..=next].iter().map(|e| (e.roll - reference.roll).abs()).fold(0.0, f64::max);
    }
    let n = cycles.len() as f64;
    Ok(KneeAngles { wqk: (wqk / n).to_degrees(), bdk: (bdk / n).to_degrees() })
}
