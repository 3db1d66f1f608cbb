use nalgebra::{ComplexField, SMatrix};
use serde::Serialize;

use super::{FluctMatrix, SteadyState, C};
use crate::model::{SystemParams, NUM_MODES};
use crate::scalar::Real;

pub const FLUCT_DIM: usize = 2 * NUM_MODES;

/// Position of `δα_mode` (or `δα⁺_mode` when `plus`) in the fluctuation vector.
#[inline]
pub fn fluct_index(mode: usize, plus: bool) -> usize {
    debug_assert!((1..=NUM_MODES).contains(&mode));
    2 * (mode - 1) + usize::from(plus)
}

/// Drift and noise of the fluctuation equations around a steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedModel<T: Real> {
    pub params: SystemParams<T>,
    pub steady: SteadyState<T>,
    /// `Ā` in `dδα = −Ā δα dt + B̄ dW`.
    pub drift: FluctMatrix<T>,
    pub noise: FluctMatrix<T>,
    pub eigenvalues: [C<T>; FLUCT_DIM],
    /// All eigenvalues of `Ā` have positive real part.
    pub stable: bool,
}

impl<T: Real> LinearizedModel<T> {
    pub fn diffusion(&self) -> FluctMatrix<T> {
        self.noise * self.noise.transpose()
    }

    pub fn min_real_eigenvalue(&self) -> T {
        self.eigenvalues.iter().map(|z| z.re).fold(T::lit(f64::INFINITY), |m, x| m.min(x))
    }

    pub fn audit(&self) -> AuditDump {
        let z = |c: &C<T>| [c.re.to_f64_lossy(), c.im.to_f64_lossy()];
        let rows = |m: &FluctMatrix<T>| -> Vec<Vec<[f64; 2]>> {
            (0..FLUCT_DIM).map(|i| (0..FLUCT_DIM).map(|j| z(&m[(i, j)])).collect()).collect()
        };
        AuditDump {
            steady: self.steady.alpha.iter().map(z).collect(),
            drift: rows(&self.drift),
            noise: rows(&self.noise),
            eigenvalues: self.eigenvalues.iter().map(z).collect(),
            stable: self.stable,
        }
    }
}

/// JSON-friendly dump of a linearized model; complex numbers as `[re, im]`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditDump {
    pub steady: Vec<[f64; 2]>,
    pub drift: Vec<Vec<[f64; 2]>>,
    pub noise: Vec<Vec<[f64; 2]>>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub stable: bool,
}

fn re<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// Noise coefficients of the positive-P equations.
///
/// Row `k` is the variable in fluctuation order `(α1, α1⁺, ..., α6, α6⁺)`;
/// column `j` is the real noise `η_{j+1}`. The α sector draws on
/// `η1, η2, η5, η6, η9, η10` and the α⁺ sector on the partners two indices up.
pub fn noise_matrix<T: Real>(chi1: T, chi2: T, a1: C<T>, a1p: C<T>, a2: C<T>, a2p: C<T>) -> FluctMatrix<T> {
    let half = T::lit(0.5);
    let root = |z: C<T>| ComplexField::sqrt(z * half);
    let (s1, s1p) = (root(a1 * chi1), root(a1p * chi1));
    let (s2, s2p) = (root(a2 * chi2), root(a2p * chi2));
    let i = C::new(T::zero(), T::one());
    let mut b = FluctMatrix::zeros();
    // (row, eta index 1-based, coefficient)
    let mut put = |row: usize, eta: usize, v: C<T>| b[(row, eta - 1)] += v;
    let (a3, a3p) = (fluct_index(3, false), fluct_index(3, true));
    let (a4, a4p) = (fluct_index(4, false), fluct_index(4, true));
    let (a5, a5p) = (fluct_index(5, false), fluct_index(5, true));
    let (a6, a6p) = (fluct_index(6, false), fluct_index(6, true));
    put(a3, 9, s1);
    put(a3, 10, s1 * i);
    put(a4, 5, s1);
    put(a4, 6, s1 * i);
    put(a5, 5, s1);
    put(a5, 6, -s1 * i);
    put(a5, 1, s2);
    put(a5, 2, s2 * i);
    put(a6, 9, s1);
    put(a6, 10, -s1 * i);
    put(a6, 1, s2);
    put(a6, 2, -s2 * i);
    put(a3p, 11, s1p);
    put(a3p, 12, s1p * i);
    put(a4p, 7, s1p);
    put(a4p, 8, s1p * i);
    put(a5p, 7, s1p);
    put(a5p, 8, -s1p * i);
    put(a5p, 3, s2p);
    put(a5p, 4, s2p * i);
    put(a6p, 11, s1p);
    put(a6p, 12, -s1p * i);
    put(a6p, 3, s2p);
    put(a6p, 4, -s2p * i);
    b
}

/// Assemble `Ā` from its printed blocks and `B̄` from the noise coefficients.
pub fn assemble<T: Real>(params: &SystemParams<T>, steady: &SteadyState<T>) -> LinearizedModel<T> {
    let p = params;
    let a = steady.alpha;
    let (x1, x2) = (p.chi1, p.chi2);
    let g = p.gamma;
    let z = C::new(T::zero(), T::zero());

    let mut a1 = SMatrix::<C<T>, 4, 4>::zeros();
    a1[(0, 0)] = re(g[0]);
    a1[(1, 1)] = re(g[0]);
    a1[(2, 2)] = re(g[1]);
    a1[(3, 3)] = re(g[1]);

    let (b3, b4, b5, b6) = (a[2], a[3], a[4], a[5]);
    #[rustfmt::skip]
    let a2 = SMatrix::<C<T>, 4, 8>::from_row_slice(&[
        b6 * x1, z, b5 * x1, z, b4 * x1, z, b3 * x1, z,
        z, b6.conj() * x1, z, b5.conj() * x1, z, b4.conj() * x1, z, b3.conj() * x1,
        z, z, z, z, b6 * x2, z, b5 * x2, z,
        z, z, z, z, z, b6.conj() * x2, z, b5.conj() * x2,
    ]);

    let k1 = a[0] * x1;
    let k1c = a[0].conj() * x1;
    let k2 = a[1] * x2;
    let k2c = a[1].conj() * x2;
    let (g3, g4, g5, g6) = (re(g[2]), re(g[3]), re(g[4]), re(g[5]));
    #[rustfmt::skip]
    let a3 = SMatrix::<C<T>, 8, 8>::from_row_slice(&[
        g3, z, z, z, z, z, z, -k1,
        z, g3, z, z, z, z, -k1c, z,
        z, z, g4, z, z, -k1, z, z,
        z, z, z, g4, -k1c, z, z, z,
        z, z, z, -k1, g5, z, z, -k2,
        z, z, -k1c, z, z, g5, -k2c, z,
        z, -k1, z, z, z, -k2, g6, z,
        -k1c, z, z, z, -k2c, z, z, g6,
    ]);

    let mut drift = FluctMatrix::zeros();
    drift.fixed_view_mut::<4, 4>(0, 0).copy_from(&a1);
    drift.fixed_view_mut::<4, 8>(0, 4).copy_from(&a2);
    drift.fixed_view_mut::<8, 4>(4, 0).copy_from(&(-a2.conjugate().transpose()));
    drift.fixed_view_mut::<8, 8>(4, 4).copy_from(&a3);

    let noise = noise_matrix(x1, x2, a[0], a[0].conj(), a[1], a[1].conj());
    let eigenvalues = eigenvalues_of(&drift);
    let stable = eigenvalues.iter().all(|e| e.re > T::zero());
    LinearizedModel { params: *params, steady: *steady, drift, noise, eigenvalues, stable }
}

fn eigenvalues_of<T: Real>(m: &FluctMatrix<T>) -> [C<T>; FLUCT_DIM] {
    let schur = m.schur();
    match schur.eigenvalues() {
        Some(ev) => std::array::from_fn(|k| ev[k]),
        None => {
            let (_, t) = schur.unpack();
            std::array::from_fn(|k| t[(k, k)])
        }
    }
}

/// The six printed eigenvalues `λ1..λ6` of the below-threshold drift matrix.
///
/// Each appears twice in the spectrum when all loss rates are equal.
pub fn closed_form_eigenvalues<T: Real>(params: &SystemParams<T>) -> [T; 6] {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let e1 = params.eps1 * params.chi1 / params.gamma[0];
    let e2 = params.eps2 * params.chi2 / params.gamma[1];
    let root = ((two * e1).powi(2) + e2 * e2).sqrt();
    let g1 = params.gamma[0];
    let g2 = params.gamma[1];
    [
        g1,
        g1,
        g2 - half * (e2 + root),
        g2 + half * (e2 - root),
        g2 + half * (-e2 + root),
        g2 + half * (e2 + root),
    ]
}

/// Pump amplitude at which the smallest real part of the trivial-branch
/// drift spectrum crosses zero, found by bisection on the numeric eigenvalues.
pub fn locate_threshold<T: Real>(chi: T, gamma: T, tol: T) -> T {
    let min_re = |eps: T| {
        let p = SystemParams::symmetric(chi, gamma, eps);
        assemble(&p, &SteadyState::trivial(&p)).min_real_eigenvalue()
    };
    let mut lo = T::zero();
    let mut hi = gamma * gamma / chi;
    while min_re(hi) > T::zero() {
        lo = hi;
        hi *= T::lit(2.0);
    }
    while hi - lo > tol {
        let mid = (lo + hi) * T::lit(0.5);
        if min_re(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::lit(0.5)
}
