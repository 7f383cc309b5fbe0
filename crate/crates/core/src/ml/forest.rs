use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::tree::{DecisionTree, TreeParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `⌊√d⌋` when `None`.
    pub m_try: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, m_try: None }
    }
}

/// Bagged CART trees with random feature subsets, majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
    /// Mean impurity decrease per feature, normalised to sum to one.
    pub importance: Vec<f64>,
}

impl RandomForest {
    pub fn fit(data: &LabeledDataset, params: ForestParams, seed: u64) -> Result<Self> {
        data.require_two_classes()?;
        if params.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".into()));
        }
        let d = data.features.len();
        let m_try = params.m_try.unwrap_or(((d as f64).sqrt().floor() as usize).max(1));
        if m_try == 0 || m_try > d {
            return Err(Error::Config(format!("m_try {m_try} outside 1..={d}")));
        }
        let tree_params = TreeParams { max_features: Some(m_try), ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = data.len();
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut importance = vec![0.0; d];
        for _ in 0..params.n_trees {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let (tree, imp) = DecisionTree::fit(&data.rows, &data.labels, data.n_classes(), idx, tree_params, &mut rng);
            let total: f64 = imp.iter().sum();
            if total > 0.0 {
                for (acc, v) in importance.iter_mut().zip(&imp) {
                    *acc += v / total;
                }
            }
            trees.push(tree);
        }
        let total: f64 = importance.iter().sum();
        if total > 0.0 {
            importance.iter_mut().for_each(|v| *v /= total);
        }
        Ok(Self { trees, n_classes: data.n_classes(), importance })
    }

    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        for t in &self.trees {
            v[t.predict(row)] += 1;
        }
        v
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let v = self.votes(row);
        v.iter().enumerate().fold(0, |best, (k, &c)| if c > v[best] { k } else { best })
    }
}

/// Feature ranking by forest importance, highest first; equal importances
/// keep feature order.
pub fn rf_importance(data: &LabeledDataset, params: ForestParams, seed: u64) -> Result<Vec<(String, f64)>> {
    let forest = RandomForest::fit(data, params, seed)?;
    let mut ranked: Vec<(usize, f64)> = forest.importance.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().map(|(j, v)| (data.features[j].clone(), v)).collect())
}

/// The first `k` names of a ranking.
pub fn select_top_k(ranking: &[(String, f64)], k: usize) -> Result<Vec<String>> {
    if k == 0 || k > ranking.len() {
        return Err(Error::Config(format!("top-k {k} outside 1..={}", ranking.len())));
    }
    Ok(ranking[..k].iter().map(|(n, _)| n.clone()).collect())
}

#[cfg(test)]
mod tests {
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    fn dataset(seed: u64, n: usize, d: usize, separating: Option<usize>) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let rows = labels
            .iter()
            .map(|&l| {
                (0..d)
                    .map(|j| {
                        let noise: f64 = StandardNormal.sample(&mut rng);
                        if Some(j) == separating {
                            l as f64 * 5.0 + 0.3 * noise
                        } else {
                            noise
                        }
                    })
                    .collect()
            })
            .collect();
        LabeledDataset::new((0..d).map(|j| format!("f{j}")).collect(), vec!["a".into(), "b".into()], rows, labels)
            .unwrap()
    }

    #[test]
    fn separating_feature_dominates() {
        let ds = dataset(3, 80, 12, Some(7));
        let rank = rf_importance(&ds, ForestParams::default(), 11).unwrap();
        assert_eq!(rank[0].0, "f7");
        assert!(rank[0].1 > 0.5, "{rank:?}");
        assert!((rank.iter().map(|r| r.1).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(rank.iter().all(|r| r.1 >= 0.0));
        let top = select_top_k(&rank, 9).unwrap();
        assert!(top.contains(&"f7".to_string()));
        assert_eq!(select_top_k(&rank, 1).unwrap(), vec!["f7".to_string()]);
        assert_eq!(select_top_k(&rank, 12).unwrap().len(), 12);
    }

    #[test]
    fn noise_importances_are_roughly_uniform() {
        for seed in 0..10 {
            let ds = dataset(100 + seed, 200, 12, None);
            let rank = rf_importance(&ds, ForestParams::default(), seed).unwrap();
            let (max, min) = (rank[0].1, rank[11].1);
            assert!(max < 3.0 * min, "seed {seed}: {rank:?}");
        }
    }

    #[test]
    fn deterministic_and_fits_training_data() {
        let ds = dataset(5, 60, 6, Some(2));
        let a = RandomForest::fit(&ds, ForestParams::default(), 9).unwrap();
        assert_eq!(a, RandomForest::fit(&ds, ForestParams::default(), 9).unwrap());
        let acc = ds.rows.iter().zip(&ds.labels).filter(|(r, &l)| a.predict(r) == l).count() as f64 / ds.len() as f64;
        assert!(acc >= 0.95);
    }

    #[test]
    fn single_class_is_error() {
        let mut ds = dataset(1, 10, 3, None);
        ds.labels = vec![0; 10];
        assert!(RandomForest::fit(&ds, ForestParams::default(), 0).is_err());
    }
}
