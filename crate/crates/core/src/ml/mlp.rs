use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 16, learning_rate: 0.5, epochs: 3000 }
    }
}

/// One tanh hidden layer and a softmax output, trained by full-batch
/// gradient descent on the mean cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
    pub final_loss: f64,
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    z.iter_mut().for_each(|v| *v = (*v - m).exp());
    let s: f64 = z.iter().sum();
    z.iter_mut().for_each(|v| *v /= s);
}

impl Mlp {
    fn init(d: usize, h: usize, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut layer = |fan_in: usize, fan_out: usize| -> Vec<Vec<f64>> {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_out).map(|_| (0..fan_in).map(|_| rng.random_range(-a..a)).collect()).collect()
        };
        let w1 = layer(d, h);
        let w2 = layer(h, k);
        Self { w1, b1: vec![0.0; h], w2, b2: vec![0.0; k], final_loss: f64::NAN }
    }

    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hidden: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| (w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>() + b).tanh())
            .collect();
        let mut out: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(w, b)| w.iter().zip(&hidden).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect();
        softmax(&mut out);
        (hidden, out)
    }

    pub fn fit(data: &LabeledDataset, params: MlpParams, seed: u64) -> Result<Self> {
        data.require_two_classes()?;
        if params.hidden == 0 || params.epochs == 0 || !(params.learning_rate > 0.0) {
            return Err(Error::Config("mlp needs positive hidden units, epochs and learning rate".into()));
        }
        let (d, h, k) = (data.features.len(), params.hidden, data.n_classes());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::init(d, h, k, &mut rng);
        let n = data.len() as f64;
        let mut loss = f64::NAN;
        for _ in 0..params.epochs {
            let mut gw1 = vec![vec![0.0; d]; h];
            let mut gb1 = vec![0.0; h];
            let mut gw2 = vec![vec![0.0; h]; k];
            let mut gb2 = vec![0.0; k];
            loss = 0.0;
            for (row, &label) in data.rows.iter().zip(&data.labels) {
                let (hidden, out) = net.forward(row);
                let p = out[label];
                // f64::max would swallow a NaN from an overflowed forward pass
                loss -= if p.is_nan() { p } else { p.max(1e-300).ln() };
                let delta: Vec<f64> =
                    out.iter().enumerate().map(|(c, p)| p - f64::from(u8::from(c == label))).collect();
                for c in 0..k {
                    gb2[c] += delta[c];
                    for u in 0..h {
                        gw2[c][u] += delta[c] * hidden[u];
                    }
                }
                for u in 0..h {
                    let back: f64 =
                        (0..k).map(|c| delta[c] * net.w2[c][u]).sum::<f64>() * (1.0 - hidden[u] * hidden[u]);
                    gb1[u] += back;
                    for (g, x) in gw1[u].iter_mut().zip(row) {
                        *g += back * x;
                    }
                }
            }
            loss /= n;
            if !loss.is_finite() {
                return Err(Error::NotConverged { objective: loss });
            }
            let step = params.learning_rate / n;
            for (w, g) in net.w1.iter_mut().flatten().zip(gw1.iter().flatten()) {
                *w -= step * g;
            }
            for (w, g) in net.w2.iter_mut().flatten().zip(gw2.iter().flatten()) {
                *w -= step * g;
            }
            for (b, g) in net.b1.iter_mut().zip(&gb1).chain(net.b2.iter_mut().zip(&gb2)) {
                *b -= step * g;
            }
        }
        net.final_loss = loss;
        Ok(net)
    }

    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        self.forward(row).1
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let p = self.probabilities(row);
        p.iter().enumerate().fold(0, |best, (k, &v)| if v > p[best] { k } else { best })
    }
}
