use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use super::kalman::{adapt_noise, innovation, kf_predict, kf_update, InnovationWindow, KalmanState, NoiseNominal};
use super::{wrap_angle, FusionConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FusedEstimate {
    pub x: Vector3<f64>,
    /// Normalised weights; zero for gated filters.
    pub weights: Vec<f64>,
}

/// Combines per-filter estimates with weights proportional to their innovation
/// likelihoods. `None` entries are filters whose innovation fell outside their
/// gate. Returns `None` when every filter was gated.
pub fn bank_fuse(estimates: &[Vector3<f64>], log_likelihoods: &[Option<f64>]) -> Option<FusedEstimate> {
    assert_eq!(estimates.len(), log_likelihoods.len(), "one likelihood per filter");
    let max = log_likelihoods.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let raw: Vec<f64> = log_likelihoods.iter().map(|l| l.map_or(0.0, |l| (l - max).exp())).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // average angle offsets from a reference so roll/yaw never straddle ±π
    let reference = estimates[weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)?];
    let mut offset = Vector3::zeros();
    for (x, &w) in estimates.iter().zip(&weights) {
        if w > 0.0 {
            let d = x - reference;
            offset += Vector3::new(wrap_angle(d[0]), d[1], wrap_angle(d[2])) * w;
        }
    }
    let x = reference + offset;
    Some(FusedEstimate { x: Vector3::new(wrap_angle(x[0]), x[1], wrap_angle(x[2])), weights })
}

/// Outcome of one bank step.
#[derive(Debug, Clone, PartialEq)]
pub struct BankStep {
    pub fused: Vector3<f64>,
    pub weights: Vec<f64>,
    /// Innovation against the common prediction (zero if unobserved).
    pub innovation: Vector3<f64>,
    pub observed: bool,
    pub all_gated: bool,
}

/// Filters sharing one prior (the previous fused estimate) and differing in
/// their innovation gate and adapted noise.
#[derive(Debug, Clone)]
pub struct FilterBank {
    filters: Vec<KalmanState>,
    gates: Vec<f64>,
    windows: Vec<InnovationWindow>,
    nominal: NoiseNominal,
    adaptive: bool,
    fused: Vector3<f64>,
}

impl FilterBank {
    pub fn new(x0: Vector3<f64>, cfg: &FusionConfig, dt: f64) -> Result<Self> {
        cfg.validate()?;
        let q = (cfg.q_nominal_deg.to_radians()).powi(2) * dt;
        let r = cfg.r_nominal_deg.to_radians().powi(2);
        let p0 = cfg.init_p_deg.to_radians().powi(2);
        let filter = KalmanState::new(
            x0,
            Matrix3::identity() * p0,
            Matrix3::identity() * q,
            Matrix3::from_diagonal(&Vector3::new(r, r, cfg.yaw_r)),
        );
        let nominal = NoiseNominal { q: filter.q, r_floor: cfg.r_floor_deg.to_radians().powi(2) };
        Self::from_filters(
            vec![filter; cfg.bank_size],
            cfg.gates_sigma.clone(),
            cfg.adapt_window,
            nominal,
            cfg.adaptive,
        )
    }

    pub fn from_filters(
        filters: Vec<KalmanState>,
        gates: Vec<f64>,
        adapt_window: usize,
        nominal: NoiseNominal,
        adaptive: bool,
    ) -> Result<Self> {
        if filters.is_empty() || filters.len() != gates.len() {
            return Err(Error::Config("filter bank needs one gate per filter and at least one filter".into()));
        }
        let fused = filters[0].x;
        let windows = (0..filters.len()).map(|_| InnovationWindow::new(adapt_window)).collect::<Result<_>>()?;
        Ok(Self { filters, gates, windows, nominal, adaptive, fused })
    }

    pub fn filters(&self) -> &[KalmanState] {
        &self.filters
    }

    pub fn gates(&self) -> &[f64] {
        &self.gates
    }

    pub fn estimate(&self) -> Vector3<f64> {
        self.fused
    }

    /// Predicts every filter from the shared prior with Euler-rate input `u`.
    pub fn predict(&mut self, u: &Vector3<f64>, dt: f64) -> Result<()> {
        for f in &mut self.filters {
            f.x = self.fused;
            *f = kf_predict(f, u, dt)?;
        }
        self.fused = self.filters[0].x;
        Ok(())
    }

    /// Gates, updates, adapts and fuses against a tilt observation.
    pub fn update(&mut self, tilt: Option<(f64, f64)>) -> Result<BankStep> {
        let prediction = self.fused;
        let Some((roll, pitch)) = tilt else {
            let l = self.filters.len() as f64;
            return Ok(BankStep {
                fused: prediction,
                weights: vec![1.0 / l; self.filters.len()],
                innovation: Vector3::zeros(),
                observed: false,
                all_gated: false,
            });
        };
        let z = Vector3::new(roll, pitch, prediction[2]);
        let mut log_lik = Vec::with_capacity(self.filters.len());
        let mut common = Vector3::zeros();
        for (i, f) in self.filters.iter_mut().enumerate() {
            let nu = innovation(f, &z);
            if i == 0 {
                common = nu;
            }
            let nu2 = Vector2::new(nu[0], nu[1]);
            let hph = f.p.fixed_view::<2, 2>(0, 0).into_owned();
            let s2: Matrix2<f64> = hph + f.r.fixed_view::<2, 2>(0, 0);
            let s_inv = s2.try_inverse().ok_or_else(|| Error::numeric(None, "singular innovation covariance"))?;
            let d2 = (nu2.transpose() * s_inv * nu2)[0];
            let accepted = d2.sqrt() <= self.gates[i];
            if self.adaptive {
                self.windows[i].push(nu2, hph);
            }
            if accepted {
                let det = s2.determinant();
                log_lik.push(Some(-0.5 * d2 - 0.5 * ((2.0 * std::f64::consts::PI).powi(2) * det).ln()));
                *f = kf_update(f, &z)?.state;
            } else {
                log_lik.push(None);
            }
            if self.adaptive {
                *f = adapt_noise(f, &self.windows[i], &self.nominal);
            }
        }
        let estimates: Vec<Vector3<f64>> = self.filters.iter().map(|f| f.x).collect();
        let step = match bank_fuse(&estimates, &log_lik) {
            Some(fused) => BankStep {
                fused: fused.x,
                weights: fused.weights,
                innovation: common,
                observed: true,
                all_gated: false,
            },
            None => BankStep {
                fused: prediction,
                weights: vec![0.0; self.filters.len()],
                innovation: common,
                observed: true,
                all_gated: true,
            },
        };
        self.fused = step.fused;
        Ok(step)
    }

    pub fn step(&mut self, u: &Vector3<f64>, dt: f64, tilt: Option<(f64, f64)>) -> Result<BankStep> {
        self.predict(u, dt)?;
        self.update(tilt)
    }
}
