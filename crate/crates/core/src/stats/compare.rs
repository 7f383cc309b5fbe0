use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hypothesis::{anova_oneway, mann_whitney, shapiro_wilk, t_test_independent, TTestKind};
use super::transform::{apply_standardization, baseline_offset, column_stats, mean_vector};
use crate::features::{GaitFeatureVector, FEATURE_NAMES};
use crate::{Error, Result};

/// Feature vectors keyed by group code (e.g. `H`, `LDHE`, `H_L`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupedFeatures {
    pub groups: BTreeMap<String, Vec<GaitFeatureVector>>,
}

impl GroupedFeatures {
    pub fn push(&mut self, group: impl Into<String>, v: GaitFeatureVector) {
        self.groups.entry(group.into()).or_default().push(v);
    }

    fn column(&self, group: &str, feature: usize) -> Result<Vec<f64>> {
        let members = self.groups.get(group).filter(|m| !m.is_empty());
        let members =
            members.ok_or_else(|| Error::Config(format!("comparison references empty or unknown group '{group}'")))?;
        Ok(members.iter().map(|v| v.to_array()[feature]).collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestPolicy {
    /// Shapiro-Wilk on both samples; t-test if both look normal, else Mann-Whitney.
    #[default]
    Auto,
    Parametric,
    Nonparametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    Pair { name: String, a: String, b: String },
    Anova { name: String, groups: Vec<String> },
}

impl Comparison {
    pub fn name(&self) -> &str {
        match self {
            Comparison::Pair { name, .. } | Comparison::Anova { name, .. } => name,
        }
    }

    pub fn pair(name: &str, a: &str, b: &str) -> Self {
        Comparison::Pair { name: name.into(), a: a.into(), b: b.into() }
    }
}

/// Group summaries and the comparisons of the three-group layout: each
/// patient side against controls, the two sides against each other, the
/// three-way ANOVA, and the controls' left against right leg.
pub fn default_plan() -> Vec<Comparison> {
    vec![
        Comparison::pair("LDHH-H", "LDHH", "H"),
        Comparison::pair("LDHE-H", "LDHE", "H"),
        Comparison::pair("LDHE-LDHH", "LDHE", "LDHH"),
        Comparison::Anova { name: "ANOVA".into(), groups: vec!["H".into(), "LDHH".into(), "LDHE".into()] },
        Comparison::pair("LR", "H_L", "H_R"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub alpha: f64,
    pub normality_alpha: f64,
    pub t_test: TTestKind,
    pub policy: TestPolicy,
    /// Groups summarised in the report, in column order.
    pub summary_groups: Vec<String>,
    pub comparisons: Vec<Comparison>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            normality_alpha: 0.05,
            t_test: TTestKind::Welch,
            policy: TestPolicy::Auto,
            summary_groups: vec!["H".into(), "LDHH".into(), "LDHE".into()],
            comparisons: default_plan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub n: usize,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsCell {
    pub feature: String,
    pub comparison: String,
    pub test: String,
    pub statistic: f64,
    pub p: f64,
    pub significant: bool,
    /// Set when the cell could not be computed; the other fields are NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub features: Vec<String>,
    pub groups: Vec<GroupSummary>,
    pub comparisons: Vec<String>,
    pub cells: Vec<StatsCell>,
}

impl StatsReport {
    pub fn cell(&self, feature: &str, comparison: &str) -> Option<&StatsCell> {
        self.cells.iter().find(|c| c.feature == feature && c.comparison == comparison)
    }

    pub fn significant_features(&self, comparison: &str) -> Vec<&str> {
        self.cells.iter().filter(|c| c.comparison == comparison && c.significant).map(|c| c.feature.as_str()).collect()
    }
}

fn summarize(group: &str, values: &[GaitFeatureVector]) -> GroupSummary {
    let rows: Vec<Vec<f64>> = values.iter().map(|v| v.to_array().to_vec()).collect();
    let mean = mean_vector(&rows);
    let n = rows.len() as f64;
    let sd = (0..FEATURE_NAMES.len())
        .map(|j| {
            if rows.len() < 2 {
                f64::NAN
            } else {
                (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            }
        })
        .collect();
    GroupSummary { group: group.into(), n: rows.len(), mean, sd }
}

/// The two-sample test chosen by `cfg.policy`: test name, statistic and p.
pub fn two_sample(a: &[f64], b: &[f64], cfg: &StatsConfig) -> Result<(String, f64, f64)> {
    let parametric = match cfg.policy {
        TestPolicy::Parametric => true,
        TestPolicy::Nonparametric => false,
        TestPolicy::Auto => {
            let normal = |x: &[f64]| shapiro_wilk(x).map(|r| r.p > cfg.normality_alpha).unwrap_or(false);
            normal(a) && normal(b)
        }
    };
    if parametric {
        let r = t_test_independent(a, b, cfg.t_test)?;
        let name = match cfg.t_test {
            TTestKind::Welch => "welch_t",
            TTestKind::Pooled => "pooled_t",
        };
        Ok((name.into(), r.t, r.p))
    } else {
        let r = mann_whitney(a, b)?;
        Ok(("mann_whitney".into(), r.statistic, r.p))
    }
}

/// Runs every comparison on every feature. Cells that fail carry the error
/// and the report is still produced; unknown groups are a configuration
/// error.
pub fn compare_groups(data: &GroupedFeatures, cfg: &StatsConfig) -> Result<StatsReport> {
    let groups = cfg.summary_groups.iter().filter_map(|g| data.groups.get(g).map(|v| summarize(g, v))).collect();
    let mut cells = Vec::new();
    for cmp in &cfg.comparisons {
        for (j, feature) in FEATURE_NAMES.iter().enumerate() {
            let outcome = match cmp {
                Comparison::Pair { a, b, .. } => {
                    let (x, y) = (data.column(a, j)?, data.column(b, j)?);
                    two_sample(&x, &y, cfg)
                }
                Comparison::Anova { groups, .. } => {
                    let cols = groups.iter().map(|g| data.column(g, j)).collect::<Result<Vec<_>>>()?;
                    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
                    anova_oneway(&refs).map(|r| ("anova".to_string(), r.statistic, r.p))
                }
            };
            cells.push(match outcome {
                Ok((test, statistic, p)) => StatsCell {
                    feature: feature.to_string(),
                    comparison: cmp.name().into(),
                    test,
                    statistic,
                    p,
                    significant: p < cfg.alpha,
                    error: None,
                },
                Err(e) => StatsCell {
                    feature: feature.to_string(),
                    comparison: cmp.name().into(),
                    test: String::new(),
                    statistic: f64::NAN,
                    p: f64::NAN,
                    significant: false,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(StatsReport {
        features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        groups,
        comparisons: cfg.comparisons.iter().map(|c| c.name().to_string()).collect(),
        cells,
    })
}

/// Standardized group means for a radar plot and, per group, the mean
/// absolute difference between its mean vector and the baseline's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarReport {
    pub features: Vec<String>,
    pub baseline: String,
    pub means: BTreeMap<String, Vec<f64>>,
    pub offsets: BTreeMap<String, f64>,
}

/// Standardizes every trial of the listed groups together, then measures
/// each group against the baseline group's mean vector.
pub fn radar(data: &GroupedFeatures, groups: &[String], baseline: &str) -> Result<RadarReport> {
    let mut rows = Vec::new();
    let mut spans = Vec::new();
    for g in groups {
        let members = data.groups.get(g).filter(|m| !m.is_empty());
        let members = members.ok_or_else(|| Error::Config(format!("radar references empty or unknown group '{g}'")))?;
        spans.push((g.clone(), rows.len(), rows.len() + members.len()));
        rows.extend(members.iter().map(|v| v.to_array().to_vec()));
    }
    let (mean, sd) = column_stats(&rows)?;
    let z = apply_standardization(&rows, &mean, &sd);
    let mut means = BTreeMap::new();
    for (g, a, b) in &spans {
        means.insert(g.clone(), mean_vector(&z[*a..*b]));
    }
    let base = means
        .get(baseline)
        .cloned()
        .ok_or_else(|| Error::Config(format!("baseline group '{baseline}' not among radar groups")))?;
    let mut offsets = BTreeMap::new();
    for (g, m) in &means {
        offsets.insert(g.clone(), baseline_offset(std::slice::from_ref(m), &base)?);
    }
    Ok(RadarReport {
        features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        baseline: baseline.into(),
        means,
        offsets,
    })
}
