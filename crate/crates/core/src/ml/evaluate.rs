use serde::{Deserialize, Serialize};

use super::cv::kfold_split;
use super::dataset::{LabeledDataset, MinMax, Task};
use super::forest::{rf_importance, select_top_k, ForestParams, RandomForest};
use super::metrics::{ConfusionMatrix, Metrics};
use super::mlp::{Mlp, MlpParams};
use super::svm::{Svm, SvmParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    RandomForest,
    Svm,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::RandomForest, ClassifierKind::Svm, ClassifierKind::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

/// Where scaling and feature selection are fitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeScope {
    /// On each training fold only.
    #[default]
    PerFold,
    /// Once on the whole dataset before splitting; test folds leak into the
    /// scaling and the feature ranking.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlConfig {
    pub classifiers: Vec<ClassifierKind>,
    pub tasks: Vec<Task>,
    pub n_trees: usize,
    pub m_try: Option<usize>,
    pub svm_c: f64,
    pub svm_gamma: Option<f64>,
    pub svm_tol: f64,
    pub mlp_hidden: usize,
    pub mlp_learning_rate: f64,
    pub mlp_epochs: usize,
    pub cv_folds: usize,
    /// Features kept after importance ranking.
    pub top_k: usize,
    pub normalize_scope: NormalizeScope,
    pub seed: u64,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            classifiers: ClassifierKind::ALL.to_vec(),
            tasks: vec![Task::ThreeClass, Task::Binary],
            n_trees: 100,
            m_try: None,
            svm_c: 1.0,
            svm_gamma: None,
            svm_tol: 1e-3,
            mlp_hidden: 16,
            mlp_learning_rate: 0.5,
            mlp_epochs: 3000,
            cv_folds: 10,
            top_k: 9,
            normalize_scope: NormalizeScope::PerFold,
            seed: 7,
        }
    }
}

impl MlConfig {
    pub fn forest(&self) -> ForestParams {
        ForestParams { n_trees: self.n_trees, m_try: self.m_try }
    }

    pub fn svm(&self) -> SvmParams {
        SvmParams { c: self.svm_c, gamma: self.svm_gamma, tol: self.svm_tol, ..Default::default() }
    }

    pub fn mlp(&self) -> MlpParams {
        MlpParams { hidden: self.mlp_hidden, learning_rate: self.mlp_learning_rate, epochs: self.mlp_epochs }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".into()));
        }
        Ok(())
    }
}

/// Decorrelates the random streams of folds and classifiers.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    RandomForest(RandomForest),
    Svm(Svm),
    Mlp(Mlp),
}

impl Model {
    pub fn train(kind: ClassifierKind, data: &LabeledDataset, cfg: &MlConfig, seed: u64) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::RandomForest => Model::RandomForest(RandomForest::fit(data, cfg.forest(), seed)?),
            ClassifierKind::Svm => Model::Svm(Svm::fit(data, cfg.svm())?),
            ClassifierKind::Mlp => Model::Mlp(Mlp::fit(data, cfg.mlp(), seed)?),
        })
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match self {
            Model::RandomForest(m) => m.predict(row),
            Model::Svm(m) => m.predict(row),
            Model::Mlp(m) => m.predict(row),
        }
    }
}

/// Scaling, selected columns and model fitted on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub selected: Vec<String>,
    pub columns: Vec<usize>,
    pub scaler: MinMax,
    pub model: Model,
}

impl FittedPipeline {
    /// Ranks features by forest importance, keeps the top ones, fits min-max
    /// scaling and trains the classifier, all on `train` alone.
    pub fn fit(kind: ClassifierKind, train: &LabeledDataset, cfg: &MlConfig, seed: u64) -> Result<Self> {
        let ranking = rf_importance(train, cfg.forest(), sub_seed(seed, 1))?;
        let selected = select_top_k(&ranking, cfg.top_k.min(train.features.len()))?;
        Self::fit_selected(kind, train, selected, cfg, seed)
    }

    fn fit_selected(
        kind: ClassifierKind,
        train: &LabeledDataset,
        selected: Vec<String>,
        cfg: &MlConfig,
        seed: u64,
    ) -> Result<Self> {
        let columns: Vec<usize> =
            selected.iter().map(|s| train.column_index(s).expect("selected from the same features")).collect();
        let reduced = train.select_columns(&columns);
        let scaler = MinMax::fit(&reduced.rows)?;
        let scaled = LabeledDataset { rows: scaler.apply(&reduced.rows), ..reduced };
        let model = Model::train(kind, &scaled, cfg, sub_seed(seed, 2))?;
        Ok(Self { selected, columns, scaler, model })
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let reduced: Vec<f64> = self.columns.iter().map(|&j| row[j]).collect();
        self.model.predict(&self.scaler.apply_row(&reduced))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub selected: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub task: Task,
    pub classifier: ClassifierKind,
    pub class_names: Vec<String>,
    pub folds: Vec<FoldReport>,
    /// Mean of the per-fold metrics.
    pub aggregate: Metrics,
    /// Confusion summed over folds.
    pub pooled: ConfusionMatrix,
}

/// Stratified k-fold evaluation of one classifier.
pub fn evaluate(
    data: &LabeledDataset,
    kind: ClassifierKind,
    task: Task,
    cfg: &MlConfig,
) -> Result<ClassificationReport> {
    cfg.validate()?;
    data.validate()?;
    data.require_two_classes()?;
    let folds = kfold_split(&data.labels, cfg.cv_folds, cfg.seed)?;
    let global = match cfg.normalize_scope {
        NormalizeScope::PerFold => None,
        NormalizeScope::Global => {
            let ranking = rf_importance(data, cfg.forest(), sub_seed(cfg.seed, 1))?;
            let selected = select_top_k(&ranking, cfg.top_k.min(data.features.len()))?;
            let mm = MinMax::fit(&data.rows)?;
            Some((selected, LabeledDataset { rows: mm.apply(&data.rows), ..data.clone() }))
        }
    };
    let mut reports = Vec::with_capacity(folds.len());
    let mut pooled = ConfusionMatrix::new(data.n_classes());
    for (f, fold) in folds.iter().enumerate() {
        let seed = sub_seed(cfg.seed, 100 + f as u64);
        let (pipeline, test) = match &global {
            None => (FittedPipeline::fit(kind, &data.subset(&fold.train), cfg, seed)?, data.subset(&fold.test)),
            Some((selected, scaled)) => {
                let p = FittedPipeline::fit_selected(kind, &scaled.subset(&fold.train), selected.clone(), cfg, seed)?;
                (p, scaled.subset(&fold.test))
            }
        };
        let predicted: Vec<usize> = test.rows.iter().map(|r| pipeline.predict(r)).collect();
        let confusion = ConfusionMatrix::from_predictions(data.n_classes(), &test.labels, &predicted);
        pooled.add(&confusion);
        reports.push(FoldReport {
            fold: f,
            n_train: fold.train.len(),
            n_test: fold.test.len(),
            selected: pipeline.selected,
            metrics: confusion.metrics(),
            confusion,
        });
    }
    let aggregate = Metrics::mean(&reports.iter().map(|r| r.metrics).collect::<Vec<_>>());
    Ok(ClassificationReport {
        task,
        classifier: kind,
        class_names: data.class_names.clone(),
        folds: reports,
        aggregate,
        pooled,
    })
}

/// Importance ranking on a whole dataset, for reporting.
pub fn importance_table(data: &LabeledDataset, cfg: &MlConfig) -> Result<Vec<(String, f64)>> {
    rf_importance(data, cfg.forest(), sub_seed(cfg.seed, 1))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    /// Two unit Gaussian blobs six standard deviations apart in every feature.
    pub(crate) fn blobs(seed: u64, per_class: usize, d: usize) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            for _ in 0..per_class {
                rows.push(
                    (0..d)
                        .map(|_| 6.0 * class as f64 + Distribution::<f64>::sample(&StandardNormal, &mut rng))
                        .collect(),
                );
                labels.push(class);
            }
        }
        LabeledDataset::new((0..d).map(|j| format!("f{j}")).collect(), vec!["a".into(), "b".into()], rows, labels)
            .unwrap()
    }

    fn fast() -> MlConfig {
        MlConfig { n_trees: 30, mlp_epochs: 1500, ..Default::default() }
    }

    #[test]
    fn separable_blobs_held_out() {
        let (train, test) = (blobs(1, 60, 4), blobs(2, 100, 4));
        for kind in ClassifierKind::ALL {
            let p = FittedPipeline::fit(kind, &train, &MlConfig { top_k: 4, ..fast() }, 3).unwrap();
            let correct = test.rows.iter().zip(&test.labels).filter(|(r, &l)| p.predict(r) == l).count();
            assert!(correct as f64 / test.len() as f64 >= 0.98, "{kind:?}: {correct}");
        }
    }

    #[test]
    fn single_class_training_fails() {
        let mut ds = blobs(1, 10, 3);
        ds.labels.iter_mut().for_each(|l| *l = 0);
        for kind in ClassifierKind::ALL {
            assert!(Model::train(kind, &ds, &fast(), 0).is_err());
        }
    }

    #[test]
    fn cross_validation_report() {
        let ds = blobs(4, 30, 12);
        let r = evaluate(&ds, ClassifierKind::RandomForest, Task::Binary, &fast()).unwrap();
        assert_eq!(r.folds.len(), 10);
        assert_eq!(r.pooled.total(), ds.len());
        assert!(r.aggregate.accuracy >= 0.95);
        assert!(r.folds.iter().all(|f| f.selected.len() == 9));
        assert_eq!(r, evaluate(&ds, ClassifierKind::RandomForest, Task::Binary, &fast()).unwrap());
        let global = MlConfig { normalize_scope: NormalizeScope::Global, ..fast() };
        assert!(evaluate(&ds, ClassifierKind::Svm, Task::Binary, &global).unwrap().aggregate.accuracy >= 0.95);
    }

    #[test]
    fn test_fold_does_not_leak() {
        let ds = blobs(5, 20, 5);
        let cfg = MlConfig { top_k: 3, ..fast() };
        let fold = &kfold_split(&ds.labels, 5, 1).unwrap()[0];
        let mut perturbed = ds.clone();
        for &i in &fold.test {
            perturbed.rows[i].iter_mut().for_each(|x| *x = *x * 50.0 - 7.0);
        }
        for kind in ClassifierKind::ALL {
            let a = FittedPipeline::fit(kind, &ds.subset(&fold.train), &cfg, 9).unwrap();
            let b = FittedPipeline::fit(kind, &perturbed.subset(&fold.train), &cfg, 9).unwrap();
            assert_eq!(a, b);
        }
    }
}
