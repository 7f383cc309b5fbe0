//! Gait event detection on the pitch trace and stance/swing partitioning.

use serde::{Deserialize, Serialize};

use crate::attitude::EulerSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HeelStrike,
    ToeOff,
    /// Part of the event vocabulary but never detected: no extremum of a
    /// single shank trace marks it. Swing is taken as stride minus stance.
    ToeStrike,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::HeelStrike => "heel_strike",
            EventKind::ToeOff => "toe_off",
            EventKind::ToeStrike => "toe_strike",
        }
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "heel_strike" | "HS" => Ok(EventKind::HeelStrike),
            "toe_off" | "TO" => Ok(EventKind::ToeOff),
            "toe_strike" | "TS" => Ok(EventKind::ToeStrike),
            other => Err(Error::Validation(format!("unknown event kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitEvent {
    pub kind: EventKind,
    pub t: f64,
    pub sample_index: usize,
}

/// Which pitch extremum marks which event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventMapping {
    /// Pitch maxima are heel strikes, minima toe-offs.
    #[default]
    PeakHeelStrike,
    TroughHeelStrike,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegConfig {
    pub min_prominence_rad: f64,
    pub min_distance_s: f64,
    pub event_mapping: EventMapping,
}

impl Default for SegConfig {
    fn default() -> Self {
        Self { min_prominence_rad: 0.2, min_distance_s: 0.4, event_mapping: EventMapping::PeakHeelStrike }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extrema {
    pub peaks: Vec<usize>,
    pub troughs: Vec<usize>,
}

/// Local maxima, plateaus resolved to their left-most sample.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height of a peak above the higher of its two bases.
pub fn prominence(x: &[f64], peak: usize) -> f64 {
    let h = x[peak];
    let mut left_min = h;
    for &v in x[..peak].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[peak + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn find_peaks(x: &[f64], min_prominence: f64, min_distance: f64) -> Vec<usize> {
    let candidates: Vec<usize> = local_maxima(x).into_iter().filter(|&i| prominence(x, i) >= min_prominence).collect();
    // keep the tallest first; equal heights resolve to the earlier index
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| x[candidates[b]].total_cmp(&x[candidates[a]]).then(a.cmp(&b)));
    let mut keep = vec![true; candidates.len()];
    for &k in &order {
        if !keep[k] {
            continue;
        }
        let p = candidates[k];
        for (j, &q) in candidates.iter().enumerate() {
            if j != k && keep[j] && ((q as f64) - (p as f64)).abs() < min_distance {
                keep[j] = false;
            }
        }
    }
    candidates.into_iter().zip(keep).filter_map(|(i, k)| k.then_some(i)).collect()
}

/// Peaks and troughs with at least `min_prominence` prominence, no two of the
/// same kind closer than `min_distance_s`.
pub fn detect_peaks(series: &[f64], min_prominence: f64, min_distance_s: f64, fs: f64) -> Extrema {
    if series.len() < 3 {
        return Extrema::default();
    }
    let min_distance = min_distance_s * fs;
    let negated: Vec<f64> = series.iter().map(|v| -v).collect();
    Extrema {
        peaks: find_peaks(series, min_prominence, min_distance),
        troughs: find_peaks(&negated, min_prominence, min_distance),
    }
}

/// Heel strikes and toe-offs from pitch extrema. Events before the first heel
/// strike and after the last one belong to partial cycles and are dropped.
pub fn events_from_pitch(euler: &EulerSeries, cfg: &SegConfig) -> Result<Vec<GaitEvent>> {
    if euler.len() < 3 {
        return Err(Error::InsufficientStrides { found: 0 });
    }
    let fs = sample_rate(&euler.t)?;
    let pitch = euler.pitch();
    let ext = detect_peaks(&pitch, cfg.min_prominence_rad, cfg.min_distance_s, fs);
    let (hs, to) = match cfg.event_mapping {
        EventMapping::PeakHeelStrike => (ext.peaks, ext.troughs),
        EventMapping::TroughHeelStrike => (ext.troughs, ext.peaks),
    };
    if hs.len() < 2 {
        return Err(Error::InsufficientStrides { found: hs.len() });
    }
    let (first, last) = (hs[0], hs[hs.len() - 1]);
    let mut events: Vec<GaitEvent> = hs
        .iter()
        .map(|&i| (EventKind::HeelStrike, i))
        .chain(to.iter().filter(|&&i| i > first && i < last).map(|&i| (EventKind::ToeOff, i)))
        .map(|(kind, i)| GaitEvent { kind, t: euler.t[i], sample_index: i })
        .collect();
    events.sort_by_key(|e| e.sample_index);
    Ok(events)
}

fn sample_rate(t: &[f64]) -> Result<f64> {
    let mut dts: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(f64::total_cmp);
    let median = dts[dts.len() / 2];
    if !(median > 0.0) {
        return Err(Error::Validation("time base is not increasing".into()));
    }
    Ok(1.0 / median)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitCycle {
    pub heel_strike: GaitEvent,
    pub toe_off: GaitEvent,
    pub next_heel_strike: GaitEvent,
    pub stance_duration: f64,
    pub swing_duration: f64,
    pub stride_duration: f64,
}

impl GaitCycle {
    pub fn stance_fraction(&self) -> f64 {
        self.stance_duration / self.stride_duration
    }

    /// Midpoint of stance, used as the zero-velocity anchor.
    pub fn mid_stance_t(&self) -> f64 {
        self.heel_strike.t + 0.5 * self.stance_duration
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GaitCycleSet {
    pub cycles: Vec<GaitCycle>,
    pub diagnostics: Vec<String>,
}

impl GaitCycleSet {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn stride_durations(&self) -> Vec<f64> {
        self.cycles.iter().map(|c| c.stride_duration).collect()
    }
}

/// Groups an ordered event stream into HS → TO → HS cycles.
pub fn build_cycles(events: &[GaitEvent]) -> Result<GaitCycleSet> {
    let mut set = GaitCycleSet::default();
    let detected: Vec<&GaitEvent> = events.iter().filter(|e| e.kind != EventKind::ToeStrike).collect();
    for w in detected.windows(2) {
        if w[0].kind == w[1].kind {
            set.diagnostics.push(format!(
                "consecutive {} events at t={:.3} s and t={:.3} s",
                w[0].kind.as_str(),
                w[0].t,
                w[1].t
            ));
        }
    }
    for w in detected.windows(3) {
        let (hs, to, next) = (w[0], w[1], w[2]);
        if hs.kind != EventKind::HeelStrike || to.kind != EventKind::ToeOff || next.kind != EventKind::HeelStrike {
            continue;
        }
        let stance = to.t - hs.t;
        let swing = next.t - to.t;
        let stride = next.t - hs.t;
        if !(stance > 0.0 && swing > 0.0) {
            set.diagnostics.push(format!("non-positive phase duration in cycle at t={:.3} s", hs.t));
            continue;
        }
        let fraction = stance / stride;
        if !(fraction > 0.3 && fraction < 0.9) {
            set.diagnostics.push(format!("stance fraction {fraction:.3} out of range in cycle at t={:.3} s", hs.t));
            continue;
        }
        set.cycles.push(GaitCycle {
            heel_strike: *hs,
            toe_off: *to,
            next_heel_strike: *next,
            stance_duration: stance,
            swing_duration: stride - stance,
            stride_duration: stride,
        });
    }
    if set.cycles.is_empty() {
        return Err(Error::Analysis(format!(
            "no complete gait cycles among {} events{}",
            events.len(),
            set.diagnostics.first().map(|d| format!(" ({d})")).unwrap_or_default()
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::attitude::EulerAngles;

    fn ev(kind: EventKind, t: f64) -> GaitEvent {
        GaitEvent { kind, t, sample_index: (t * 100.0).round() as usize }
    }

    fn series_from_pitch(pitch: &[f64], t0: f64) -> EulerSeries {
        let t = (0..pitch.len()).map(|i| t0 + i as f64 / 100.0).collect();
        EulerSeries::from_angles(t, pitch.iter().map(|&p| EulerAngles::new(0.0, p, 0.0)).collect())
    }

    #[test]
    fn sine_peaks() {
        let x: Vec<f64> = (0..300).map(|i| (2.0 * PI * i as f64 / 100.0).sin()).collect();
        let ext = detect_peaks(&x, 0.5, 0.5, 100.0);
        assert_eq!(ext.peaks.len(), 3);
        for (p, want) in ext.peaks.iter().zip([25, 125, 225]) {
            assert!((*p as i64 - want).abs() <= 1, "{p}");
        }
        assert_eq!(ext.troughs.len(), 3);
    }

    #[test]
    fn constant_has_no_peaks() {
        assert_eq!(detect_peaks(&[1.0; 50], 0.0, 0.1, 100.0), Extrema::default());
    }

    #[test]
    fn plateau_left_most() {
        let x = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(detect_peaks(&x, 0.5, 0.0, 100.0).peaks, vec![2]);
    }

    #[test]
    fn distance_keeps_taller_peak() {
        let x = [0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0];
        assert_eq!(detect_peaks(&x, 0.5, 0.03, 100.0).peaks, vec![3, 8]);
    }

    #[test]
    fn prominence_of_nested_peaks() {
        let x = [0.0, 3.0, 1.0, 2.0, 0.5, 4.0, 0.0];
        assert_eq!(prominence(&x, 3), 1.0);
        assert_eq!(prominence(&x, 1), 2.5);
        assert_eq!(prominence(&x, 5), 4.0);
    }

    #[test]
    fn one_cycle_arithmetic() {
        let events = [ev(EventKind::HeelStrike, 1.0), ev(EventKind::ToeOff, 1.6), ev(EventKind::HeelStrike, 2.0)];
        let set = build_cycles(&events).unwrap();
        assert_eq!(set.len(), 1);
        let c = set.cycles[0];
        assert!((c.stance_duration - 0.6).abs() < 1e-12);
        assert!((c.swing_duration - 0.4).abs() < 1e-12);
        assert!((c.stride_duration - 1.0).abs() < 1e-12);
        assert!((c.stance_duration + c.swing_duration - c.stride_duration).abs() < 1e-9);
    }

    #[test]
    fn missing_toe_off_yields_no_cycle() {
        let events = [ev(EventKind::HeelStrike, 1.0), ev(EventKind::HeelStrike, 2.0)];
        match build_cycles(&events) {
            Err(Error::Analysis(msg)) => assert!(msg.contains("consecutive heel_strike")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn static_trace_has_insufficient_strides() {
        let s = series_from_pitch(&[0.01; 500], 0.0);
        assert!(matches!(events_from_pitch(&s, &SegConfig::default()), Err(Error::InsufficientStrides { found: 0 })));
    }

    fn gait_like(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / 100.0;
                0.5 * (2.0 * PI * t).cos() + 0.1 * (4.0 * PI * t + 0.3).sin()
            })
            .collect()
    }

    #[test]
    fn events_alternate_and_reverse() {
        let pitch = gait_like(800);
        let events = events_from_pitch(&series_from_pitch(&pitch, 0.0), &SegConfig::default()).unwrap();
        assert_eq!(events.first().unwrap().kind, EventKind::HeelStrike);
        assert_eq!(events.last().unwrap().kind, EventKind::HeelStrike);
        for w in events.windows(2) {
            assert_ne!(w[0].kind, w[1].kind);
        }
        let reversed: Vec<f64> = pitch.iter().rev().copied().collect();
        let ext = detect_peaks(&pitch, 0.2, 0.4, 100.0);
        let rev = detect_peaks(&reversed, 0.2, 0.4, 100.0);
        let mirrored: Vec<usize> = rev.peaks.iter().rev().map(|i| pitch.len() - 1 - i).collect();
        assert_eq!(ext.peaks, mirrored);
    }

    proptest! {
        #[test]
        fn time_shift_moves_events(shift in -50.0..50.0f64) {
            let pitch = gait_like(600);
            let a = events_from_pitch(&series_from_pitch(&pitch, 0.0), &SegConfig::default()).unwrap();
            let b = events_from_pitch(&series_from_pitch(&pitch, shift), &SegConfig::default()).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.sample_index, y.sample_index);
                prop_assert!((y.t - x.t - shift).abs() < 1e-9);
            }
        }

        #[test]
        fn amplitude_scaling_keeps_indices(c in 0.1..20.0f64) {
            let pitch = gait_like(600);
            let scaled: Vec<f64> = pitch.iter().map(|p| p * c).collect();
            let a = detect_peaks(&pitch, 0.2, 0.4, 100.0);
            let b = detect_peaks(&scaled, 0.2 * c, 0.4, 100.0);
            prop_assert_eq!(a, b);
        }
    }
}
