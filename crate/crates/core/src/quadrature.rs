//! Gaussian second moments of the four low-frequency modes.

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::model::{x_index, y_index, QUAD_DIM};
use crate::scalar::Real;

pub type QuadVector<T> = SVector<T, QUAD_DIM>;
pub type QuadMatrix<T> = SMatrix<T, QUAD_DIM, QUAD_DIM>;

/// Which quadrature of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Y,
}

/// Linear combination `Σ c_k Q_k` over (X3, Y3, ..., X6, Y6).
pub fn combo<T: Real>(terms: &[(Quadrature, usize, T)]) -> QuadVector<T> {
    let mut c = QuadVector::zeros();
    for &(q, mode, w) in terms {
        let i = match q {
            Quadrature::X => x_index(mode),
            Quadrature::Y => y_index(mode),
        };
        c[i] += w;
    }
    c
}

/// Combination acting on the X quadratures of modes 3..6 with weights `w`.
pub fn x_combo<T: Real>(w: [T; 4]) -> QuadVector<T> {
    let mut c = QuadVector::zeros();
    for (k, wk) in w.into_iter().enumerate() {
        c[2 * k] = wk;
    }
    c
}

pub fn y_combo<T: Real>(w: [T; 4]) -> QuadVector<T> {
    let mut c = QuadVector::zeros();
    for (k, wk) in w.into_iter().enumerate() {
        c[2 * k + 1] = wk;
    }
    c
}

/// Symplectic form with `[Q_k, Q_l] = 2i Ω_kl`.
pub fn symplectic_form<T: Real>() -> QuadMatrix<T> {
    let mut omega = QuadMatrix::zeros();
    for k in 0..4 {
        omega[(2 * k, 2 * k + 1)] = T::one();
        omega[(2 * k + 1, 2 * k)] = -T::one();
    }
    omega
}

/// Quadrature means and symmetrized covariances, `V_kl = ⟨{Q_k, Q_l}⟩/2 − ⟨Q_k⟩⟨Q_l⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct CovarianceState<T: Real> {
    pub mean: QuadVector<T>,
    pub cov: QuadMatrix<T>,
}

impl<T: Real> CovarianceState<T> {
    pub fn vacuum() -> Self {
        Self { mean: QuadVector::zeros(), cov: QuadMatrix::identity() }
    }

    pub fn from_cov(cov: QuadMatrix<T>) -> Self {
        Self { mean: QuadVector::zeros(), cov }
    }

    /// `V(Σ c_k Q_k) = cᵀ V c`.
    pub fn variance_of(&self, c: &QuadVector<T>) -> T {
        (c.transpose() * self.cov * c)[(0, 0)]
    }

    pub fn covariance_of(&self, a: &QuadVector<T>, b: &QuadVector<T>) -> T {
        (a.transpose() * self.cov * b)[(0, 0)]
    }

    /// Covariance `V_ij` between `Y_i` and `Y_j`.
    pub fn y_cov(&self, i: usize, j: usize) -> T {
        self.cov[(y_index(i), y_index(j))]
    }

    pub fn x_cov(&self, i: usize, j: usize) -> T {
        self.cov[(x_index(i), x_index(j))]
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (self.cov - self.cov.transpose()).amax() <= tol
    }

    /// Smallest eigenvalue of `V + iΩ`, which for a physical state is non-negative.
    ///
    /// Computed from the real symmetric embedding `[[V, −Ω], [Ω, V]]`, whose spectrum
    /// is that of the Hermitian matrix with every eigenvalue doubled.
    pub fn uncertainty_margin(&self) -> T {
        let omega = symplectic_form::<T>();
        let mut big = SMatrix::<T, 16, 16>::zeros();
        big.fixed_view_mut::<8, 8>(0, 0).copy_from(&self.cov);
        big.fixed_view_mut::<8, 8>(8, 8).copy_from(&self.cov);
        big.fixed_view_mut::<8, 8>(0, 8).copy_from(&(-omega));
        big.fixed_view_mut::<8, 8>(8, 0).copy_from(&omega);
        let sym = (big + big.transpose()) * T::lit(0.5);
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Apply a linear map `Q → S Q`.
    pub fn transformed(&self, s: &QuadMatrix<T>) -> Self {
        Self { mean: s * self.mean, cov: s * self.cov * s.transpose() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vacuum_is_identity_and_saturates_uncertainty() {
        let v = CovarianceState::<f64>::vacuum();
        assert_eq!(v.cov, QuadMatrix::identity());
        assert!(v.uncertainty_margin().abs() < 1e-12);
    }

    #[test]
    fn classical_noise_free_state_is_unphysical() {
        let v = CovarianceState::<f64>::from_cov(QuadMatrix::identity() * 0.5);
        assert!(v.uncertainty_margin() < -0.1);
    }

    #[test]
    fn combos_place_weights() {
        let c = combo(&[(Quadrature::X, 3, 1.0), (Quadrature::Y, 6, -2.0)]);
        assert_eq!(c[0], 1.0);
        assert_eq!(c[7], -2.0);
        assert_eq!(x_combo([1.0, 2.0, 3.0, 4.0])[4], 3.0);
        assert_eq!(y_combo([1.0, 2.0, 3.0, 4.0])[5], 3.0);
    }

    proptest! {
        #[test]
        fn quadratic_form_matches_expansion(
            entries in proptest::collection::vec(-1.0f64..1.0, 64),
            coeffs in proptest::collection::vec(-2.0f64..2.0, 8),
        ) {
            let m = QuadMatrix::from_iterator(entries);
            let cov = m * m.transpose();
            let state = CovarianceState::from_cov(cov);
            let c = QuadVector::from_iterator(coeffs);
            let mut direct = 0.0;
            for k in 0..8 {
                for l in 0..8 {
                    direct += c[k] * c[l] * cov[(k, l)];
                }
            }
            prop_assert!((state.variance_of(&c) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}
