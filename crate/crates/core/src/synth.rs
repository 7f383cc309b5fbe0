//! Synthetic shank IMU trials with full ground truth.
//!
//! A trial is quiet standing, a straight walk and quiet standing again, with an
//! optional in-place turn before the final stand. The walk starts and ends at
//! mid-stance, where the sensor is momentarily at rest.
//!
//! Per stride the pitch falls by half-cosine from `+A` at heel strike to `−A`
//! at toe-off and rises back to the next stride's `+A` through swing, so the
//! extrema sit exactly on the events and pitch crosses zero at mid-stance.
//! Roll is zero in stance and bulges by `sin²` to the swing amplitude.
//! Between consecutive mid-stances the sensor advances by the stride length
//! with a `1 − cos` velocity profile. The shape is deliberately simple and not
//! physiological; it exists to exercise every estimator against known truth.
//!
//! Gyroscope samples are the discrete inverse of the Euler-rate kinematics:
//! integrating noise-free rates one step forward lands exactly on the next
//! ground-truth attitude. All randomness comes from one ChaCha8 stream seeded
//! by the profile seed, drawn in a fixed order.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::attitude::{direction_matrix, euler_rates_to_body, wrap_angle, EulerAngles, KinematicsFrame};
use crate::imu_io::{Group, ImuSample, ImuTrial, Leg, TrialMeta};
use crate::segmentation::{EventKind, GaitEvent};
use crate::{Error, Result, GRAVITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaitProfile {
    /// Steps per minute (two steps per stride).
    pub cadence: f64,
    pub stride_length: f64,
    pub stance_fraction: f64,
    /// Pitch excursion from mid-stance at heel strike and toe-off (rad).
    pub pitch_amplitude: f64,
    /// Peak roll during swing (rad).
    pub roll_amplitude: f64,
    pub stride_time_cv: f64,
    pub stride_length_cv: f64,
    /// Stride-to-stride variation of both angular amplitudes.
    pub amplitude_cv: f64,
    pub gyro_bias: f64,
    pub gyro_noise_sd: f64,
    pub acc_noise_sd: f64,
    pub sample_rate_hz: f64,
    pub lead_in_s: f64,
    /// Duration of an in-place 180° turn after the walk; zero disables it.
    pub turn_s: f64,
    /// Fraction of samples removed to simulate transmission drops.
    pub drop_fraction: f64,
    pub kinematics_frame: KinematicsFrame,
    pub seed: u64,
}

impl Default for GaitProfile {
    fn default() -> Self {
        Self::reference(Group::Control)
    }
}

impl GaitProfile {
    /// Group reference profiles. Cadence, stride length, stance fraction, knee
    /// excursions and variabilities follow published group means for lumbar
    /// disc herniation patients (per side) and healthy controls.
    pub fn reference(group: Group) -> Self {
        let base = Self {
            cadence: 117.6,
            stride_length: 1.41,
            stance_fraction: 0.62,
            pitch_amplitude: 38.71f64.to_radians(),
            roll_amplitude: 23.97f64.to_radians(),
            stride_time_cv: 0.04,
            stride_length_cv: 0.06,
            amplitude_cv: 0.02,
            gyro_bias: 0.0,
            gyro_noise_sd: 0.01,
            acc_noise_sd: 0.05,
            sample_rate_hz: 100.0,
            lead_in_s: 1.0,
            turn_s: 0.0,
            drop_fraction: 0.0,
            kinematics_frame: KinematicsFrame::NavFrame,
            seed: 0,
        };
        match group {
            Group::Control => base,
            Group::LdhHealthySide => Self {
                cadence: 88.8,
                stride_length: 0.94,
                stance_fraction: 0.57,
                pitch_amplitude: 40.72f64.to_radians(),
                roll_amplitude: 26.64f64.to_radians(),
                stride_time_cv: 0.15,
                stride_length_cv: 0.12,
                amplitude_cv: 0.04,
                ..base
            },
            Group::LdhAffectedSide => Self {
                cadence: 64.8,
                stride_length: 0.73,
                stance_fraction: 0.38,
                pitch_amplitude: 23.16f64.to_radians(),
                roll_amplitude: 40.32f64.to_radians(),
                stride_time_cv: 0.25,
                stride_length_cv: 0.24,
                amplitude_cv: 0.06,
                ..base
            },
        }
    }

    pub fn noise_free(self) -> Self {
        Self { gyro_bias: 0.0, gyro_noise_sd: 0.0, acc_noise_sd: 0.0, ..self }
    }

    /// Mean stride duration in seconds.
    pub fn stride_time(&self) -> f64 {
        120.0 / self.cadence
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.cadence,
            self.stride_length,
            self.pitch_amplitude,
            self.roll_amplitude,
            self.gyro_bias,
            self.gyro_noise_sd,
            self.acc_noise_sd,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("profile values must be finite".into()));
        }
        if !(self.stance_fraction > 0.3 && self.stance_fraction < 0.9) {
            return Err(Error::Config(format!("stance_fraction {} outside (0.3, 0.9)", self.stance_fraction)));
        }
        if !(self.cadence > 0.0 && self.sample_rate_hz > 0.0) {
            return Err(Error::Config("cadence and sample_rate_hz must be positive".into()));
        }
        if [self.stride_time_cv, self.stride_length_cv, self.amplitude_cv].iter().any(|c| *c < 0.0) {
            return Err(Error::Config("coefficients of variation must be non-negative".into()));
        }
        if self.stride_length < 0.0 || self.gyro_noise_sd < 0.0 || self.acc_noise_sd < 0.0 {
            return Err(Error::Config("stride length and noise levels must be non-negative".into()));
        }
        if !(0.0..0.2).contains(&self.drop_fraction) || self.lead_in_s < 0.0 || self.turn_s < 0.0 {
            return Err(Error::Config("drop_fraction must lie in [0, 0.2); lead_in_s and turn_s non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub euler: Vec<EulerAngles>,
    /// Heel strikes and toe-offs of the walk, in time order.
    pub events: Vec<GaitEvent>,
    /// Durations of complete HS → HS strides.
    pub stride_times: Vec<f64>,
    /// Stance fractions of the same strides.
    pub stance_fractions: Vec<f64>,
    /// Displacement between consecutive mid-stances.
    pub stride_lengths: Vec<f64>,
    pub mid_stance_times: Vec<f64>,
    /// Pitch amplitude at each heel strike and roll amplitude of each swing (rad).
    pub pitch_amplitudes: Vec<f64>,
    pub roll_amplitudes: Vec<f64>,
    pub straight_window: (f64, f64),
    pub turn_window: Option<(f64, f64)>,
    /// Grid indices removed by drop simulation.
    pub dropped: Vec<usize>,
}

impl GroundTruth {
    pub fn heel_strikes(&self) -> Vec<f64> {
        self.events.iter().filter(|e| e.kind == EventKind::HeelStrike).map(|e| e.t).collect()
    }

    pub fn toe_offs(&self) -> Vec<f64> {
        self.events.iter().filter(|e| e.kind == EventKind::ToeOff).map(|e| e.t).collect()
    }
}

struct Stride {
    hs: f64,
    duration: f64,
    stance: f64,
    amplitude: f64,
    roll: f64,
}

impl Stride {
    fn to(&self) -> f64 {
        self.hs + self.stance
    }
    fn mid(&self) -> f64 {
        self.hs + 0.5 * self.stance
    }
    fn end(&self) -> f64 {
        self.hs + self.duration
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn half_cos(from: f64, to: f64, u: f64) -> f64 {
    to + (from - to) * 0.5 * (1.0 + (PI * u).cos())
}

struct Timeline {
    strides: Vec<Stride>,
    lengths: Vec<f64>,
    walk_start: f64,
    walk_end: f64,
    turn: Option<(f64, f64)>,
    end: f64,
}

impl Timeline {
    fn build(p: &GaitProfile, duration_s: f64, rng: &mut ChaCha8Rng) -> Self {
        let st = p.stride_time();
        let walk_start = p.lead_in_s;
        let budget = duration_s - p.lead_in_s - p.turn_s;
        let draw = |rng: &mut ChaCha8Rng| {
            let d = st * (1.0 + p.stride_time_cv * normal(rng)).max(0.5);
            let a = p.pitch_amplitude * (1.0 + p.amplitude_cv * normal(rng)).max(0.1);
            let r = p.roll_amplitude * (1.0 + p.amplitude_cv * normal(rng)).max(0.0);
            (d, a, r)
        };
        let (d0, a0, r0) = draw(rng);
        let mut strides = vec![Stride {
            hs: walk_start - 0.5 * p.stance_fraction * d0,
            duration: d0,
            stance: p.stance_fraction * d0,
            amplitude: a0,
            roll: r0,
        }];
        let mut lengths = Vec::new();
        loop {
            let (d, a, r) = draw(rng);
            let last = strides.last().expect("non-empty");
            let next = Stride { hs: last.end(), duration: d, stance: p.stance_fraction * d, amplitude: a, roll: r };
            let length = p.stride_length * (1.0 + p.stride_length_cv * normal(rng)).max(0.0);
            if next.mid() > budget && strides.len() > 1 {
                break;
            }
            lengths.push(length);
            strides.push(next);
        }
        let walk_end = strides.last().expect("non-empty").mid();
        let turn = (p.turn_s > 0.0).then_some((walk_end, walk_end + p.turn_s));
        let end = duration_s.max(turn.map_or(walk_end, |t| t.1) + p.lead_in_s);
        Self { strides, lengths, walk_start, walk_end, turn, end }
    }

    /// Attitude, forward displacement and forward acceleration at time `t`.
    fn state(&self, t: f64) -> (EulerAngles, f64, f64) {
        if t <= self.walk_start {
            return (EulerAngles::ZERO, 0.0, 0.0);
        }
        let total: f64 = self.lengths.iter().sum();
        if t >= self.walk_end {
            let yaw = match self.turn {
                Some((a, b)) if t < b => half_cos(0.0, PI, (t - a) / (b - a)),
                Some(_) => PI,
                None => 0.0,
            };
            return (EulerAngles::new(0.0, 0.0, wrap_angle(yaw)), total, 0.0);
        }
        let k = self.strides.partition_point(|s| s.hs <= t) - 1;
        let s = &self.strides[k];
        let next = self.strides.get(k + 1);
        let (pitch, roll) = if t < s.to() {
            (half_cos(s.amplitude, -s.amplitude, (t - s.hs) / s.stance), 0.0)
        } else {
            let u = (t - s.to()) / (s.duration - s.stance);
            let a_next = next.map_or(s.amplitude, |n| n.amplitude);
            (half_cos(-s.amplitude, a_next, u), s.roll * (PI * u).sin().powi(2))
        };
        // segment j runs from mid-stance j to mid-stance j + 1
        let j = if t < s.mid() { k - 1 } else { k };
        let (m0, m1) = (self.strides[j].mid(), self.strides[j + 1].mid());
        let dur = m1 - m0;
        let u = (t - m0) / dur;
        let before: f64 = self.lengths[..j].iter().sum();
        let len = self.lengths[j];
        let x = before + len * (u - (2.0 * PI * u).sin() / (2.0 * PI));
        let a = len * 2.0 * PI / (dur * dur) * (2.0 * PI * u).sin();
        (EulerAngles::new(roll, pitch, 0.0), x, a)
    }
}

/// Generates one trial and its ground truth.
pub fn generate_trial(profile: &GaitProfile, duration_s: f64, meta: TrialMeta) -> Result<(ImuTrial, GroundTruth)> {
    profile.validate()?;
    if duration_s < 5.0 {
        return Err(Error::Config(format!("synthetic trials need at least 5 s, got {duration_s}")));
    }
    let fs = profile.sample_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let timeline = Timeline::build(profile, duration_s, &mut rng);
    let n = (timeline.end * fs).round() as usize + 1;
    let t: Vec<f64> = (0..n).map(|i| i as f64 / fs).collect();
    let states: Vec<(EulerAngles, f64, f64)> = t.iter().map(|&ti| timeline.state(ti)).collect();
    let euler: Vec<EulerAngles> = states.iter().map(|s| s.0).collect();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let e = euler[k];
        let rate_at = |k: usize| {
            let (a, b) = (euler[k], euler[k + 1]);
            Vector3::new(wrap_angle(b.roll - a.roll), b.pitch - a.pitch, wrap_angle(b.yaw - a.yaw)) * fs
        };
        let rates = if k + 1 < n { rate_at(k) } else { rate_at(k - 1) };
        let gyro = euler_rates_to_body(&rates, e, profile.kinematics_frame);
        let specific_force = Vector3::new(states[k].2, 0.0, GRAVITY);
        let acc = direction_matrix(e).transpose() * specific_force;
        let mut gyro_out = [0.0; 3];
        let mut acc_out = [0.0; 3];
        for i in 0..3 {
            gyro_out[i] = gyro[i] + profile.gyro_bias + profile.gyro_noise_sd * normal(&mut rng);
            acc_out[i] = acc[i] + profile.acc_noise_sd * normal(&mut rng);
        }
        samples.push(ImuSample { t: t[k], acc: acc_out, gyro: gyro_out });
    }

    let dropped = choose_drops(n, profile.drop_fraction, &mut rng);
    let (samples, euler) = if dropped.is_empty() {
        (samples, euler)
    } else {
        let keep = |i: &usize| dropped.binary_search(i).is_err();
        let s = (0..n).filter(keep).map(|i| samples[i]).collect();
        let e = (0..n).filter(keep).map(|i| euler[i]).collect();
        (s, e)
    };

    let index_of = |time: f64| (time * fs).round() as usize;
    let strides = &timeline.strides;
    let mut events = Vec::new();
    for (k, s) in strides.iter().enumerate() {
        if k > 0 {
            events.push(GaitEvent { kind: EventKind::HeelStrike, t: s.hs, sample_index: index_of(s.hs) });
        }
        if k + 1 < strides.len() {
            events.push(GaitEvent { kind: EventKind::ToeOff, t: s.to(), sample_index: index_of(s.to()) });
        }
    }
    let inner = &strides[1..strides.len() - 1];
    let truth = GroundTruth {
        euler,
        events,
        stride_times: inner.iter().map(|s| s.duration).collect(),
        stance_fractions: inner.iter().map(|s| s.stance / s.duration).collect(),
        stride_lengths: timeline.lengths.clone(),
        mid_stance_times: strides.iter().map(Stride::mid).collect(),
        pitch_amplitudes: strides.iter().map(|s| s.amplitude).collect(),
        roll_amplitudes: strides.iter().map(|s| s.roll).collect(),
        straight_window: (0.0, timeline.walk_end + if timeline.turn.is_some() { 0.0 } else { profile.lead_in_s }),
        turn_window: timeline.turn,
        dropped,
    };
    let meta = TrialMeta { sample_rate_hz: fs, ..meta };
    Ok((ImuTrial::new(meta, samples)?, truth))
}

/// Isolated interior indices, sorted.
fn choose_drops(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let target = (fraction * n as f64).round() as usize;
    let mut chosen: Vec<usize> = Vec::with_capacity(target);
    let mut taken = vec![false; n];
    let mut attempts = 0;
    while chosen.len() < target && attempts < 100 * n {
        attempts += 1;
        let i = rng.random_range(2..n - 2);
        if taken[i - 1] || taken[i] || taken[i + 1] {
            continue;
        }
        taken[i] = true;
        chosen.push(i);
    }
    chosen.sort_unstable();
    chosen
}

/// Reference meta used when a trial is generated outside a population.
pub fn default_meta(group: Group) -> TrialMeta {
    TrialMeta { subject_id: "synthetic".into(), leg: Leg::Left, group, sample_rate_hz: 100.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub ldh_healthy: GaitProfile,
    pub ldh_affected: GaitProfile,
    pub control: GaitProfile,
    pub n_ldh: usize,
    pub n_control: usize,
    /// Between-subject spread of profile parameters (coefficient of variation).
    pub subject_cv: f64,
    /// Additional independent spread per leg.
    pub leg_cv: f64,
    /// Log-scale spread of each subject's variability traits (stride-time,
    /// stride-length and amplitude CVs). Both legs share the traits.
    pub variability_trait_sd: f64,
    pub duration_s: f64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            ldh_healthy: GaitProfile::reference(Group::LdhHealthySide),
            ldh_affected: GaitProfile::reference(Group::LdhAffectedSide),
            control: GaitProfile::reference(Group::Control),
            n_ldh: 20,
            n_control: 15,
            subject_cv: 0.08,
            leg_cv: 0.01,
            variability_trait_sd: 0.4,
            duration_s: 40.0,
        }
    }
}

impl PopulationSpec {
    pub fn profile(&self, group: Group) -> &GaitProfile {
        match group {
            Group::LdhHealthySide => &self.ldh_healthy,
            Group::LdhAffectedSide => &self.ldh_affected,
            Group::Control => &self.control,
        }
    }
}

/// One planned trial of a population: labels plus the individual profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannedTrial {
    pub meta: TrialMeta,
    pub profile: GaitProfile,
}

impl PlannedTrial {
    pub fn generate(&self, duration_s: f64) -> Result<(ImuTrial, GroundTruth)> {
        generate_trial(&self.profile, duration_s, self.meta.clone())
    }

    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.meta.subject_id, self.meta.leg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Population {
    pub trials: Vec<PlannedTrial>,
    pub duration_s: f64,
}

impl Population {
    pub fn count(&self, group: Group) -> usize {
        self.trials.iter().filter(|t| t.meta.group == group).count()
    }
}

/// Multiplicative factors shared by one subject's legs.
struct SubjectFactors([f64; 7]);

/// Mean-one log-normal multipliers of the three variability parameters.
struct VariabilityTraits([f64; 3]);

impl VariabilityTraits {
    fn draw(rng: &mut ChaCha8Rng, sd: f64) -> Self {
        Self(std::array::from_fn(|_| (sd * normal(rng) - 0.5 * sd * sd).exp()))
    }
}

impl SubjectFactors {
    fn draw(rng: &mut ChaCha8Rng, cv: f64) -> Self {
        Self(std::array::from_fn(|_| 1.0 + cv * normal(rng)))
    }

    fn apply(&self, p: &GaitProfile, leg: &SubjectFactors, traits: &VariabilityTraits, seed: u64) -> GaitProfile {
        let f = |i: usize| (self.0[i] * leg.0[i]).max(0.2);
        let stance = (p.stance_fraction * (1.0 + 0.5 * (f(2) - 1.0))).clamp(0.32, 0.88);
        GaitProfile {
            cadence: p.cadence * f(0),
            stride_length: p.stride_length * f(1),
            stance_fraction: stance,
            pitch_amplitude: p.pitch_amplitude * f(3),
            roll_amplitude: p.roll_amplitude * f(4),
            stride_time_cv: p.stride_time_cv * f(5) * traits.0[0],
            stride_length_cv: p.stride_length_cv * f(6) * traits.0[1],
            amplitude_cv: p.amplitude_cv * traits.0[2],
            seed,
            ..p.clone()
        }
    }
}

/// Draws individual profiles for every subject and leg. LDH subjects have a
/// healthy and an affected leg sharing the subject factors; controls have two
/// legs of the control profile, again sharing subject factors.
pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<Population> {
    if !(spec.variability_trait_sd >= 0.0 && spec.subject_cv >= 0.0 && spec.leg_cv >= 0.0) {
        return Err(Error::Config("population spreads must be non-negative".into()));
    }
    if spec.n_ldh < 5 || spec.n_control < 5 {
        return Err(Error::Config("populations need at least 5 subjects per group".into()));
    }
    for g in Group::ALL {
        spec.profile(g).validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(2 * (spec.n_ldh + spec.n_control));
    let mut plan = |id: String, legs: [(Leg, Group); 2], rng: &mut ChaCha8Rng| {
        let subject = SubjectFactors::draw(rng, spec.subject_cv);
        let traits = VariabilityTraits::draw(rng, spec.variability_trait_sd);
        for (leg, group) in legs {
            let leg_factors = SubjectFactors::draw(rng, spec.leg_cv);
            let trial_seed: u64 = rng.random();
            let profile = subject.apply(spec.profile(group), &leg_factors, &traits, trial_seed);
            let meta = TrialMeta { subject_id: id.clone(), leg, group, sample_rate_hz: profile.sample_rate_hz };
            trials.push(PlannedTrial { meta, profile });
        }
    };
    for i in 0..spec.n_ldh {
        let affected = if rng.random::<bool>() { Leg::Left } else { Leg::Right };
        let legs = [(affected.other(), Group::LdhHealthySide), (affected, Group::LdhAffectedSide)];
        plan(format!("P{:02}", i + 1), legs, &mut rng);
    }
    for i in 0..spec.n_control {
        plan(format!("C{:02}", i + 1), [(Leg::Left, Group::Control), (Leg::Right, Group::Control)], &mut rng);
    }
    Ok(Population { trials, duration_s: spec.duration_s })
}
