use serde::{Deserialize, Serialize};

use crate::features::{GaitFeatureVector, FEATURE_NAMES};
use crate::imu_io::Group;
use crate::{Error, Result};

/// Feature rows with integer class labels `0..class_names.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub features: Vec<String>,
    pub class_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(
        features: Vec<String>,
        class_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let ds = Self { features, class_names, rows, labels };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() {
            return Err(Error::Validation(format!("{} rows but {} labels", self.rows.len(), self.labels.len())));
        }
        let d = self.features.len();
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Validation(format!("row {i} has {} values, expected {d}", r.len())));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("row {i} has a missing or non-finite value")));
            }
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.class_names.len()) {
            return Err(Error::Validation(format!("label {l} outside 0..{}", self.class_names.len())));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Fails unless at least two classes have members.
    pub fn require_two_classes(&self) -> Result<()> {
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::Degenerate("training data holds a single class".into()));
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.clone(),
            class_names: self.class_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Keeps the given feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            features: columns.iter().map(|&j| self.features[j].clone()).collect(),
            class_names: self.class_names.clone(),
            rows: self.rows.iter().map(|r| columns.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }
}

/// Which groups are classified against which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Healthy side, affected side and control legs (labels 0, 1, 2).
    ThreeClass,
    /// Affected-side legs (label 1) against control legs (label 0).
    Binary,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ThreeClass => "three_class",
            Task::Binary => "binary",
        }
    }

    fn label(self, g: Group) -> Option<usize> {
        match (self, g) {
            (Task::ThreeClass, g) => Some(g.label()),
            (Task::Binary, Group::Control) => Some(0),
            (Task::Binary, Group::LdhAffectedSide) => Some(1),
            (Task::Binary, Group::LdhHealthySide) => None,
        }
    }

    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::ThreeClass => Group::ALL.iter().map(|g| g.as_str().to_string()).collect(),
            Task::Binary => vec![Group::Control.as_str().into(), Group::LdhAffectedSide.as_str().into()],
        }
    }

    /// Builds the task's dataset from labelled feature vectors, dropping
    /// groups the task does not use.
    pub fn dataset(self, records: &[(Group, GaitFeatureVector)]) -> Result<LabeledDataset> {
        let (rows, labels) =
            records.iter().filter_map(|(g, v)| self.label(*g).map(|l| (v.to_array().to_vec(), l))).unzip();
        LabeledDataset::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), self.class_names(), rows, labels)
    }
}

/// Per-feature min-max scaling fitted on one set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().ok_or_else(|| Error::Degenerate("min-max fit on no rows".into()))?.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for j in 0..d {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        if let Some(j) = (0..d).find(|&j| !(max[j] > min[j])) {
            return Err(Error::Degenerate(format!("feature {j} is constant on the fitting rows")));
        }
        Ok(Self { min, max })
    }

    /// Scales with the fitted range; values outside it are not clipped.
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(self.min.iter().zip(&self.max)).map(|(x, (lo, hi))| (x - lo) / (hi - lo)).collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

/// Fits min-max statistics on `train` and applies them to both sets.
pub fn minmax_normalize(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, MinMax)> {
    let mm = MinMax::fit(&train.rows)?;
    let scale = |d: &LabeledDataset| LabeledDataset { rows: mm.apply(&d.rows), ..d.clone() };
    Ok((scale(train), scale(test), mm))
}
