use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A CART classification tree grown on Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features examined per split; all when `None`.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_features: None, max_depth: None, min_samples_split: 2 }
    }
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    // lowest label wins ties
    counts.iter().enumerate().fold(0, |best, (k, &c)| if c > counts[best] { k } else { best })
}

struct Grower<'a, R> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    /// Unnormalised impurity decrease per feature.
    importance: Vec<f64>,
}

struct Best {
    feature: usize,
    threshold: f64,
    child_impurity: f64,
    split_at: usize,
}

impl<R: Rng> Grower<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    fn grow(&mut self, mut idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let impurity = gini(&counts);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if impurity <= 0.0 || idx.len() < self.params.min_samples_split.max(2) || !depth_ok {
            return slot;
        }
        let Some(best) = self.best_split(&mut idx) else { return slot };
        let n = idx.len() as f64;
        let total = self.rows.len() as f64;
        self.importance[best.feature] += n / total * (impurity - best.child_impurity);
        idx.sort_by(|&a, &b| self.rows[a][best.feature].total_cmp(&self.rows[b][best.feature]).then(a.cmp(&b)));
        let right_idx = idx.split_off(best.split_at);
        let left = self.grow(idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[slot] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        slot
    }

    fn best_split(&mut self, idx: &mut [usize]) -> Option<Best> {
        let d = self.rows[0].len();
        let m = self.params.max_features.unwrap_or(d).clamp(1, d);
        let mut candidates = sample(self.rng, d, m).into_vec();
        candidates.sort_unstable();
        let n = idx.len();
        let parent = self.counts(idx);
        let mut best: Option<Best> = None;
        for f in candidates {
            idx.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0; self.n_classes];
            for k in 1..n {
                left[self.labels[idx[k - 1]]] += 1;
                let (lo, hi) = (self.rows[idx[k - 1]][f], self.rows[idx[k]][f]);
                if hi <= lo {
                    continue;
                }
                let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let child = (k as f64 * gini(&left) + (n - k) as f64 * gini(&right)) / n as f64;
                if best.as_ref().is_none_or(|b| child < b.child_impurity - 1e-15) {
                    best = Some(Best { feature: f, threshold: 0.5 * (lo + hi), child_impurity: child, split_at: k });
                }
            }
        }
        best
    }
}

impl DecisionTree {
    /// Grows a tree on the rows selected by `idx` (repeats allowed, as in a
    /// bootstrap sample). Returns the tree and its per-feature impurity
    /// decrease weighted by node size.
    pub fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        idx: Vec<usize>,
        params: TreeParams,
        rng: &mut R,
    ) -> (Self, Vec<f64>) {
        let sample_rows: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let sample_labels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let d = rows.first().map_or(0, Vec::len);
        let mut g = Grower {
            rows: &sample_rows,
            labels: &sample_labels,
            n_classes,
            params,
            rng,
            nodes: Vec::new(),
            importance: vec![0.0; d],
        };
        g.grow((0..sample_rows.len()).collect(), 0);
        let importance = g.importance;
        (Self { nodes: g.nodes }, importance)
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right }
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}
