use serde::{Deserialize, Serialize};

/// One-vs-rest confusion counts for a single class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl BinaryConfusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// Zero when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        let sum = |f: fn(&Metrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Metrics {
            accuracy: sum(|m| m.accuracy),
            precision: sum(|m| m.precision),
            recall: sum(|m| m.recall),
            f1: sum(|m| m.f1),
        }
    }
}

/// `counts[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self { counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn from_predictions(n_classes: usize, actual: &[usize], predicted: &[usize]) -> Self {
        let mut m = Self::new(n_classes);
        for (&a, &p) in actual.iter().zip(predicted) {
            m.counts[a][p] += 1;
        }
        m
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn one_vs_rest(&self, class: usize) -> BinaryConfusion {
        let total = self.total();
        let tp = self.counts[class][class];
        let fn_ = self.counts[class].iter().sum::<usize>() - tp;
        let fp = self.counts.iter().map(|r| r[class]).sum::<usize>() - tp;
        BinaryConfusion { tp, fp, fn_, tn: total - tp - fp - fn_ }
    }

    /// Two classes: the counts of class 1 as the positive class. More
    /// classes: precision, recall and F1 macro-averaged over one-vs-rest
    /// confusions, with accuracy the fraction classified correctly.
    pub fn metrics(&self) -> Metrics {
        let k = self.counts.len();
        if k == 2 {
            let c = self.one_vs_rest(1);
            return Metrics { accuracy: c.accuracy(), precision: c.precision(), recall: c.recall(), f1: c.f1() };
        }
        let per: Vec<BinaryConfusion> = (0..k).map(|c| self.one_vs_rest(c)).collect();
        let mean = |f: fn(&BinaryConfusion) -> f64| per.iter().map(f).sum::<f64>() / k as f64;
        Metrics {
            accuracy: ratio((0..k).map(|c| self.counts[c][c]).sum(), self.total()),
            precision: mean(BinaryConfusion::precision),
            recall: mean(BinaryConfusion::recall),
            f1: mean(BinaryConfusion::f1),
        }
    }
}
