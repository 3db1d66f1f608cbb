//! Positive-P phase-space simulation of the full six-mode dynamics.
//!
//! Each mode carries two independent complex amplitudes `α_i` and `α⁺_i`;
//! ensemble averages of `(α⁺_j)^m α_i^n` estimate normally-ordered moments.
//! Trajectories follow the Itô equations with pump, loss and optional
//! injection inside the cavity, or the bare downconversion terms without it.

mod checkpoint;
mod moments;
mod sim;

pub use checkpoint::{CheckpointHeader, CHECKPOINT_MAGIC};
pub use moments::{
    combo_variance, estimate_moments, intensity, joint_variances, manley_rowe, quadrature_covariance,
    MomentEstimate, NormalMoment, QuadratureEstimate,
};
pub use sim::{
    joint_operator_variances_cavity, simulate, InitialState, SimConfig, Simulation, Snapshot,
    TrajectoryEnsemble,
};

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::model::{SystemParams, NUM_MODES};
use crate::scalar::Real;

pub type C<T> = nalgebra::Complex<T>;

/// One sample of the positive-P distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PhaseSpacePoint<T> {
    pub alpha: [C<T>; NUM_MODES],
    pub alpha_plus: [C<T>; NUM_MODES],
}

impl<T: Real> PhaseSpacePoint<T> {
    pub fn zero() -> Self {
        let z = C::new(T::zero(), T::zero());
        Self { alpha: [z; NUM_MODES], alpha_plus: [z; NUM_MODES] }
    }

    /// Coherent amplitudes on the pumps, vacuum elsewhere.
    pub fn coherent_pumps(a1: C<T>, a2: C<T>) -> Self {
        let mut p = Self::zero();
        p.alpha[0] = a1;
        p.alpha[1] = a2;
        p.alpha_plus[0] = a1.conj();
        p.alpha_plus[1] = a2.conj();
        p
    }

    /// `α⁺_i α_i` for mode `i` (1-based).
    pub fn number(&self, mode: usize) -> C<T> {
        self.alpha_plus[mode - 1] * self.alpha[mode - 1]
    }

    /// Stochastic quadratures (X3, Y3, ..., X6, Y6).
    pub fn quadratures(&self) -> [C<T>; 8] {
        let i = C::new(T::zero(), T::one());
        std::array::from_fn(|k| {
            let m = k / 2 + 2;
            let (a, ap) = (self.alpha[m], self.alpha_plus[m]);
            if k % 2 == 0 { a + ap } else { -i * (a - ap) }
        })
    }

    pub fn max_modulus(&self) -> T {
        self.alpha
            .iter()
            .chain(self.alpha_plus.iter())
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |m, x| if x > m || !x.is_finite() { x } else { m })
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.alpha
            .iter()
            .chain(self.alpha_plus.iter())
            .all(|z| z.re.to_f64_lossy().is_finite() && z.im.to_f64_lossy().is_finite())
    }

    pub(crate) fn axpy(&mut self, h: T, d: &Self) {
        for k in 0..NUM_MODES {
            self.alpha[k] += d.alpha[k] * h;
            self.alpha_plus[k] += d.alpha_plus[k] * h;
        }
    }
}

/// Deterministic downconversion drift without pump, loss or injection.
pub fn drift_free<T: Real>(chi1: T, chi2: T, x: &PhaseSpacePoint<T>) -> PhaseSpacePoint<T> {
    let mut d = PhaseSpacePoint::zero();
    let sectors = [(&x.alpha, &x.alpha_plus), (&x.alpha_plus, &x.alpha)];
    for (s, (a, ap)) in sectors.into_iter().enumerate() {
        let out = [
            -(a[3] * a[4] + a[2] * a[5]) * chi1,
            -(a[4] * a[5]) * chi2,
            a[0] * ap[5] * chi1,
            a[0] * ap[4] * chi1,
            a[0] * ap[3] * chi1 + a[1] * ap[5] * chi2,
            a[0] * ap[2] * chi1 + a[1] * ap[4] * chi2,
        ];
        if s == 0 {
            d.alpha = out;
        } else {
            d.alpha_plus = out;
        }
    }
    d
}

/// Full deterministic drift inside the cavity: downconversion, pumping,
/// damping and the injected signal on mode 3.
pub fn drift_cavity<T: Real>(p: &SystemParams<T>, x: &PhaseSpacePoint<T>) -> PhaseSpacePoint<T> {
    let mut d = drift_free(p.chi1, p.chi2, x);
    let eps = [p.eps1, p.eps2, p.eps3_injected];
    for k in 0..NUM_MODES {
        d.alpha[k] -= x.alpha[k] * p.gamma[k];
        d.alpha_plus[k] -= x.alpha_plus[k] * p.gamma[k];
    }
    for (k, &e) in eps.iter().enumerate() {
        // modes 1, 2 and 3 carry the coherent drives
        d.alpha[k] += C::new(e, T::zero());
        d.alpha_plus[k] += C::new(e, T::zero());
    }
    d
}

/// Noise increment for real Gaussian increments `eta[0..12]` (`η1..η12`).
pub fn noise_increment<T: Real>(chi1: T, chi2: T, x: &PhaseSpacePoint<T>, eta: &[T; 12]) -> PhaseSpacePoint<T> {
    let half = T::lit(0.5);
    let root = |z: C<T>| ComplexField::sqrt(z * half);
    let s1 = root(x.alpha[0] * chi1);
    let s1p = root(x.alpha_plus[0] * chi1);
    let s2 = root(x.alpha[1] * chi2);
    let s2p = root(x.alpha_plus[1] * chi2);
    let e = |k: usize| eta[k - 1];
    let pm = |a: T, b: T| (C::new(a, b), C::new(a, -b));
    let (n9p, n9m) = pm(e(9), e(10));
    let (n5p, n5m) = pm(e(5), e(6));
    let (n1p, n1m) = pm(e(1), e(2));
    let (n11p, n11m) = pm(e(11), e(12));
    let (n7p, n7m) = pm(e(7), e(8));
    let (n3p, n3m) = pm(e(3), e(4));
    let mut d = PhaseSpacePoint::zero();
    d.alpha[2] = s1 * n9p;
    d.alpha[3] = s1 * n5p;
    d.alpha[4] = s1 * n5m + s2 * n1p;
    d.alpha[5] = s1 * n9m + s2 * n1m;
    d.alpha_plus[2] = s1p * n11p;
    d.alpha_plus[3] = s1p * n7p;
    d.alpha_plus[4] = s1p * n7m + s2p * n3p;
    d.alpha_plus[5] = s1p * n11m + s2p * n3m;
    d
}
