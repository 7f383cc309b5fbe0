//! Normality screening, two-sample and multi-group tests, standardization
//! and baseline-offset scoring.

mod compare;
mod hypothesis;
pub mod special;
mod transform;

pub use compare::{
    compare_groups, default_plan, radar, two_sample, Comparison, GroupSummary, GroupedFeatures, RadarReport, StatsCell,
    StatsConfig, StatsReport, TestPolicy,
};
pub use hypothesis::{
    anova_oneway, mann_whitney, pearson, shapiro_wilk, t_test_independent, TTestKind, TTestResult, TestResult,
};
pub use transform::{apply_standardization, baseline_offset, column_stats, mean_vector, standardize};
