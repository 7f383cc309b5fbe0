//! Runs trials through every stage and assembles population-level inputs for
//! statistics and classification.

use serde::{Deserialize, Serialize};

use crate::attitude::{estimate_attitude, EulerSeries, FusionConfig};
use crate::features::{feature_vector, FeatureConfig, GaitFeatureVector, StrideStreams};
use crate::imu_io::{Group, ImuTrial, Leg};
use crate::preprocess::{preprocess_trial, PreprocConfig, PreprocReport};
use crate::segmentation::{build_cycles, events_from_pitch, GaitCycleSet, GaitEvent, SegConfig};
use crate::stats::GroupedFeatures;
use crate::Result;

/// Per-trial stage settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub preprocess: PreprocConfig,
    pub fusion: FusionConfig,
    pub segmentation: SegConfig,
    pub features: FeatureConfig,
}

#[derive(Debug, Clone)]
pub struct TrialAnalysis {
    pub preprocessed: ImuTrial,
    pub preprocess_report: PreprocReport,
    pub euler: EulerSeries,
    pub events: Vec<GaitEvent>,
    pub cycles: GaitCycleSet,
    pub features: GaitFeatureVector,
    pub streams: StrideStreams,
}

/// Preprocessing, attitude, events, cycles and features for one trial.
/// Errors name the stage that failed.
pub fn analyze_trial(trial: &ImuTrial, cfg: &AnalysisConfig) -> Result<TrialAnalysis> {
    let (preprocessed, preprocess_report) =
        preprocess_trial(trial, &cfg.preprocess).map_err(|e| e.in_stage("preprocess"))?;
    let euler = estimate_attitude(&preprocessed, &cfg.fusion).map_err(|e| e.in_stage("attitude"))?;
    let events = events_from_pitch(&euler, &cfg.segmentation).map_err(|e| e.in_stage("segmentation"))?;
    let cycles = build_cycles(&events).map_err(|e| e.in_stage("segmentation"))?;
    let (features, streams) =
        feature_vector(&preprocessed, &euler, &cycles, &cfg.features).map_err(|e| e.in_stage("features"))?;
    Ok(TrialAnalysis { preprocessed, preprocess_report, euler, events, cycles, features, streams })
}

/// One row of the feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFeatures {
    pub subject_id: String,
    pub leg: Leg,
    pub group: Group,
    pub features: GaitFeatureVector,
}

/// Groups rows by group code. Control legs are additionally split into
/// `H_L` and `H_R` for the left-against-right comparison.
pub fn group_features(rows: &[TrialFeatures]) -> GroupedFeatures {
    let mut g = GroupedFeatures::default();
    for r in rows {
        g.push(r.group.code(), r.features);
        if r.group == Group::Control {
            let side = match r.leg {
                Leg::Left => "H_L",
                Leg::Right => "H_R",
            };
            g.push(side, r.features);
        }
    }
    g
}

/// `(group, features)` pairs as the classifiers consume them.
pub fn labelled(rows: &[TrialFeatures]) -> Vec<(Group, GaitFeatureVector)> {
    rows.iter().map(|r| (r.group, r.features)).collect()
}
