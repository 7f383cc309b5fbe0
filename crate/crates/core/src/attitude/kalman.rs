use std::collections::VecDeque;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};

use super::wrap_angle;
use crate::{Error, Result};

/// Linear Kalman filter over the Euler triple. The transition is the identity
/// and the control matrix is `dt · I`, with Euler rates as the control input.
/// The observation matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: Vector3<f64>,
    pub p: Matrix3<f64>,
    pub q: Matrix3<f64>,
    pub r: Matrix3<f64>,
}

impl KalmanState {
    pub fn new(x: Vector3<f64>, p: Matrix3<f64>, q: Matrix3<f64>, r: Matrix3<f64>) -> Self {
        Self { x, p, q, r }
    }

    pub fn transition() -> Matrix3<f64> {
        Matrix3::identity()
    }

    pub fn input_matrix(dt: f64) -> Matrix3<f64> {
        Matrix3::identity() * dt
    }
}

pub fn kf_predict(state: &KalmanState, u: &Vector3<f64>, dt: f64) -> Result<KalmanState> {
    if !(dt > 0.0) {
        return Err(Error::numeric(None, format!("non-positive time step {dt}")));
    }
    let a = KalmanState::transition();
    let x = a * state.x + KalmanState::input_matrix(dt) * u;
    let p = a * state.p * a.transpose() + state.q;
    Ok(KalmanState {
        x: Vector3::new(wrap_angle(x[0]), x[1], wrap_angle(x[2])),
        p: symmetrize(&p),
        q: state.q,
        r: state.r,
    })
}

/// Innovation `z − H·x`, with roll and yaw wrapped.
pub fn innovation(state: &KalmanState, z: &Vector3<f64>) -> Vector3<f64> {
    let d = z - state.x;
    Vector3::new(wrap_angle(d[0]), wrap_angle(d[1]), wrap_angle(d[2]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub state: KalmanState,
    pub gain: Matrix3<f64>,
    pub innovation: Vector3<f64>,
    /// Innovation covariance `H P Hᵀ + R`.
    pub s: Matrix3<f64>,
}

/// Measurement update with the Joseph-form covariance.
pub fn kf_update(state: &KalmanState, z: &Vector3<f64>) -> Result<UpdateOutcome> {
    let s = state.p + state.r;
    let s_inv = s.try_inverse().ok_or_else(|| Error::numeric(None, "singular innovation covariance"))?;
    let gain = state.p * s_inv;
    let nu = innovation(state, z);
    let x = state.x + gain * nu;
    let ikh = Matrix3::identity() - gain;
    let p = ikh * state.p * ikh.transpose() + gain * state.r * gain.transpose();
    Ok(UpdateOutcome {
        state: KalmanState {
            x: Vector3::new(wrap_angle(x[0]), x[1], wrap_angle(x[2])),
            p: symmetrize(&p),
            q: state.q,
            r: state.r,
        },
        gain,
        innovation: nu,
        s,
    })
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Nominal noise levels that adaptation is anchored to.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseNominal {
    pub q: Matrix3<f64>,
    /// Floor on the adapted tilt observation variance (rad²).
    pub r_floor: f64,
}

/// Sliding window of roll/pitch innovations, each stored with the predicted
/// covariance `H P Hᵀ` it was formed against.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationWindow {
    capacity: usize,
    entries: VecDeque<(Vector2<f64>, Matrix2<f64>)>,
}

impl InnovationWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < 10 {
            return Err(Error::Config(format!("innovation window {capacity} is shorter than 10")));
        }
        Ok(Self { capacity, entries: VecDeque::with_capacity(capacity) })
    }

    pub fn push(&mut self, nu: Vector2<f64>, hph: Matrix2<f64>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((nu, hph));
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mean outer product of the innovations (zero-mean assumption).
    pub fn covariance(&self) -> Matrix2<f64> {
        let n = self.entries.len().max(1) as f64;
        self.entries.iter().map(|(v, _)| v * v.transpose()).sum::<Matrix2<f64>>() / n
    }

    pub fn mean_hph(&self) -> Matrix2<f64> {
        let n = self.entries.len().max(1) as f64;
        self.entries.iter().map(|(_, h)| *h).sum::<Matrix2<f64>>() / n
    }
}

/// Re-estimates the tilt observation covariance and rescales the process
/// noise from a full innovation window. Returns the state unchanged until the
/// window has filled.
///
/// `R ← C − H P Hᵀ`, eigenvalues floored at `r_floor`; `Q ← clamp(ratio,
/// 0.1, 10) · Q_nominal` where `ratio = tr C / tr(H P Hᵀ + R)`.
pub fn adapt_noise(state: &KalmanState, window: &InnovationWindow, nominal: &NoiseNominal) -> KalmanState {
    if !window.is_full() {
        return state.clone();
    }
    let c = window.covariance();
    let hph = window.mean_hph();
    let r_old = state.r.fixed_view::<2, 2>(0, 0).into_owned();
    let predicted = (hph + r_old).trace();
    let ratio = if predicted > 0.0 { c.trace() / predicted } else { 1.0 };

    let raw = c - hph;
    let eig = SymmetricEigen::new((raw + raw.transpose()) * 0.5);
    let floored = eig.eigenvalues.map(|l| l.max(nominal.r_floor));
    let r_tilt = eig.eigenvectors * Matrix2::from_diagonal(&floored) * eig.eigenvectors.transpose();

    let mut r = state.r;
    r.fixed_view_mut::<2, 2>(0, 0).copy_from(&((r_tilt + r_tilt.transpose()) * 0.5));
    KalmanState { x: state.x, p: state.p, q: nominal.q * ratio.clamp(0.1, 10.0), r }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn state() -> KalmanState {
        KalmanState::new(
            Vector3::new(0.1, -0.2, 0.3),
            Matrix3::identity() * 0.01,
            Matrix3::identity() * 1e-4,
            Matrix3::identity() * 0.001,
        )
    }

    #[test]
    fn zero_input_predict() {
        let s = state();
        let p = kf_predict(&s, &Vector3::zeros(), 0.01).unwrap();
        assert_eq!(p.x, s.x);
        assert!((p.p - (s.p + s.q)).amax() < 1e-18);
        assert!(kf_predict(&s, &Vector3::zeros(), 0.0).is_err());
    }

    #[test]
    fn constant_input_integrates() {
        let mut s = state();
        let u = Vector3::new(0.2, -0.1, 0.05);
        for _ in 0..100 {
            s = kf_predict(&s, &u, 0.01).unwrap();
        }
        let expected = state().x + u * 1.0;
        assert!((s.x - expected).amax() < 1e-12);
    }

    #[test]
    fn huge_r_freezes_state() {
        let mut s = state();
        s.r *= 1e12;
        let out = kf_update(&s, &Vector3::new(1.0, 1.0, 1.0)).unwrap();
        assert!((out.state.x - s.x).amax() < 1e-6);
    }

    #[test]
    fn huge_p_snaps_to_observation() {
        let mut s = state();
        s.p = Matrix3::identity() * 1e6;
        s.r = Matrix3::identity() * 1e-6;
        let z = Vector3::new(0.5, 0.4, -0.3);
        let out = kf_update(&s, &z).unwrap();
        assert!((out.state.x - z).amax() < 1e-6);
    }

    #[test]
    fn update_wraps_innovation() {
        let mut s = state();
        s.x[0] = 3.1;
        let nu = innovation(&s, &Vector3::new(-3.1, s.x[1], s.x[2]));
        assert!((nu[0] - (2.0 * std::f64::consts::PI - 6.2)).abs() < 1e-12);
    }

    fn window_matching(s: &Matrix2<f64>, hph: Matrix2<f64>, n: usize) -> InnovationWindow {
        let l = s.cholesky().unwrap().l();
        let r2 = 2f64.sqrt();
        let basis = [Vector2::new(r2, 0.0), Vector2::new(-r2, 0.0), Vector2::new(0.0, r2), Vector2::new(0.0, -r2)];
        let mut w = InnovationWindow::new(n).unwrap();
        for i in 0..n {
            w.push(l * basis[i % 4], hph);
        }
        w
    }

    #[test]
    fn consistent_innovations_leave_noise_unchanged() {
        let s = state();
        let nominal = NoiseNominal { q: s.q, r_floor: 1e-8 };
        let hph = Matrix2::new(0.004, 0.001, 0.001, 0.003);
        let total = hph + s.r.fixed_view::<2, 2>(0, 0);
        let w = window_matching(&total, hph, 40);
        let out = adapt_noise(&s, &w, &nominal);
        assert!((out.r - s.r).amax() < 1e-12);
        assert!((out.q - s.q).amax() < 1e-15);
    }

    #[test]
    fn doubled_variance_raises_r() {
        let s = state();
        let nominal = NoiseNominal { q: s.q, r_floor: 1e-8 };
        let hph = Matrix2::identity() * 0.002;
        let base = hph + s.r.fixed_view::<2, 2>(0, 0);
        let r1 = adapt_noise(&s, &window_matching(&base, hph, 40), &nominal).r;
        let r2 = adapt_noise(&s, &window_matching(&(base * 2.0), hph, 40), &nominal).r;
        assert!(r2[(0, 0)] > r1[(0, 0)] && r2[(1, 1)] > r1[(1, 1)]);
    }

    #[test]
    fn zero_innovations_floor_r() {
        let s = state();
        let nominal = NoiseNominal { q: s.q, r_floor: 1e-7 };
        let mut w = InnovationWindow::new(10).unwrap();
        for _ in 0..10 {
            w.push(Vector2::zeros(), Matrix2::identity() * 0.01);
        }
        let out = adapt_noise(&s, &w, &nominal);
        assert!((out.r.fixed_view::<2, 2>(0, 0) - Matrix2::identity() * 1e-7).amax() < 1e-15);
        assert!((out.q - s.q * 0.1).amax() < 1e-18);
        assert_eq!(out.r[(2, 2)], s.r[(2, 2)]);
    }

    fn psd() -> impl Strategy<Value = Matrix3<f64>> {
        (prop::array::uniform9(-1.0..1.0f64), 1e-4..1.0f64).prop_map(|(a, d)| {
            let m = Matrix3::from_row_slice(&a);
            m * m.transpose() + Matrix3::identity() * d
        })
    }

    proptest! {
        #[test]
        fn joseph_matches_short_form_at_optimal_gain(p in psd(), r in psd(), z in prop::array::uniform3(-0.5..0.5f64)) {
            let s = KalmanState::new(Vector3::zeros(), p, Matrix3::zeros(), r);
            let out = kf_update(&s, &Vector3::from(z)).unwrap();
            let short = (Matrix3::identity() - out.gain) * p;
            prop_assert!((out.state.p - short).amax() < 1e-9);
            let e = SymmetricEigen::new(out.state.p).eigenvalues;
            prop_assert!(e.min() > -1e-12);
        }
    }
}
