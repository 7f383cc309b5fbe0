//! The toolkit configuration file: one TOML document with a table per
//! module. Every key is optional and defaults to the values documented on the
//! module's config type.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attitude::FusionConfig;
use crate::features::FeatureConfig;
use crate::imu_io::IngestConfig;
use crate::ml::MlConfig;
use crate::pipeline::AnalysisConfig;
use crate::preprocess::PreprocConfig;
use crate::segmentation::SegConfig;
use crate::stats::StatsConfig;
use crate::synth::PopulationSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    /// Master seed for population generation and classifier training.
    pub seed: u64,
    pub ingest: IngestConfig,
    pub preprocess: PreprocConfig,
    pub fusion: FusionConfig,
    pub segmentation: SegConfig,
    pub features: FeatureConfig,
    pub synth: PopulationSpec,
    pub stats: StatsConfig,
    pub ml: MlConfig,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            ingest: IngestConfig::default(),
            preprocess: PreprocConfig::default(),
            fusion: FusionConfig::default(),
            segmentation: SegConfig::default(),
            features: FeatureConfig::default(),
            synth: PopulationSpec::default(),
            stats: StatsConfig::default(),
            ml: MlConfig::default(),
        }
    }
}

impl ToolkitConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types serialize to TOML")
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            preprocess: self.preprocess.clone(),
            fusion: self.fusion.clone(),
            segmentation: self.segmentation.clone(),
            features: self.features.clone(),
        }
    }

    /// Classifier settings with the master seed applied.
    pub fn ml_seeded(&self) -> MlConfig {
        MlConfig { seed: self.seed, ..self.ml.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate(self.ingest.sample_rate_hz)?;
        self.fusion.validate()?;
        self.features.validate()?;
        self.ml.validate()?;
        if !(self.segmentation.min_distance_s > 0.0 && self.segmentation.min_prominence_rad >= 0.0) {
            return Err(Error::Config("segmentation distances must be positive".into()));
        }
        if !(self.stats.alpha > 0.0 && self.stats.alpha < 1.0) {
            return Err(Error::Config(format!("stats alpha {} outside (0, 1)", self.stats.alpha)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::TTestKind;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ToolkitConfig::from_toml("").unwrap(), ToolkitConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ToolkitConfig { seed: 99, ..Default::default() };
        cfg.stats.t_test = TTestKind::Pooled;
        cfg.fusion.gates_sigma = vec![2.0, 5.0];
        cfg.fusion.bank_size = 2;
        assert_eq!(ToolkitConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn module_keys() {
        let text = r#"
            seed = 3
            [preprocess]
            butter_cutoff_hz = 8.0
            [fusion]
            q_nominal_deg = 0.4
            [segmentation]
            event_mapping = "trough_heel_strike"
            [ml]
            cv_folds = 5
            normalize_scope = "global"
            [synth]
            n_control = 6
        "#;
        let cfg = ToolkitConfig::from_toml(text).unwrap();
        assert_eq!(cfg.preprocess.butter_cutoff_hz, 8.0);
        assert_eq!(cfg.ml.cv_folds, 5);
        assert_eq!(cfg.synth.n_control, 6);
        assert_eq!(cfg.ml_seeded().seed, 3);
    }

    #[test]
    fn typos_and_bad_values_rejected() {
        assert!(matches!(ToolkitConfig::from_toml("[fusion]\nq_nominal = 1.0"), Err(Error::Toml(_))));
        assert!(ToolkitConfig::from_toml("[preprocess]\nbutter_cutoff_hz = 80.0").is_err());
        assert!(ToolkitConfig::from_toml("[stats]\nalpha = 1.5").is_err());
    }
}
