//! Gait-pattern classification: forest importance ranking, top-k feature
//! selection, min-max scaling, stratified cross-validation and three
//! classifiers (random forest, RBF support vector machine, perceptron).

mod cv;
mod dataset;
mod evaluate;
mod forest;
mod metrics;
mod mlp;
mod svm;
mod tree;

pub use cv::{kfold_split, Fold};
pub use dataset::{minmax_normalize, LabeledDataset, MinMax, Task};
pub use evaluate::{
    evaluate, importance_table, sub_seed, ClassificationReport, ClassifierKind, FittedPipeline, FoldReport, MlConfig,
    Model, NormalizeScope,
};
pub use forest::{rf_importance, select_top_k, ForestParams, RandomForest};
pub use metrics::{BinaryConfusion, ConfusionMatrix, Metrics};
pub use mlp::{Mlp, MlpParams};
pub use svm::{scale_gamma, BinarySvm, Svm, SvmParams};
pub use tree::{gini, DecisionTree, TreeParams};
