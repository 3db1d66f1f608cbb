use serde::Serialize;

use super::{PhaseSpacePoint, C};
use crate::error::{Error, Result};
use crate::model::QUAD_DIM;
use crate::quadrature::{QuadMatrix, QuadVector};
use crate::scalar::Real;
use crate::undepleted::JointOperatorSpec;

/// A normally-ordered moment `⟨a†_{j1} a†_{j2} ... a_{i1} a_{i2} ...⟩`.
///
/// Modes are 1-based; repeated entries raise the power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalMoment {
    pub creation: Vec<usize>,
    pub annihilation: Vec<usize>,
}

impl NormalMoment {
    pub fn new(creation: &[usize], annihilation: &[usize]) -> Self {
        Self { creation: creation.to_vec(), annihilation: annihilation.to_vec() }
    }

    pub fn number(mode: usize) -> Self {
        Self::new(&[mode], &[mode])
    }

    pub fn amplitude(mode: usize) -> Self {
        Self::new(&[], &[mode])
    }

    /// Phase-space integrand for one sample.
    pub fn sample<T: Real>(&self, x: &PhaseSpacePoint<T>) -> C<T> {
        let mut v = C::new(T::one(), T::zero());
        for &j in &self.creation {
            v *= x.alpha_plus[j - 1];
        }
        for &i in &self.annihilation {
            v *= x.alpha[i - 1];
        }
        v
    }
}

/// Ensemble mean with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate<T> {
    pub mean: C<T>,
    /// Standard error of the real and imaginary parts combined in quadrature.
    pub stderr: T,
}

impl<T: Real> MomentEstimate<T> {
    pub fn re(&self) -> T {
        self.mean.re
    }

    /// Fail if the estimate is noisier than `limit`.
    pub fn require(self, limit: T) -> Result<Self> {
        if self.stderr > limit {
            return Err(Error::InsufficientTrajectories {
                stderr: self.stderr.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        Ok(self)
    }

    /// Whether `value` lies within `k` standard errors of the real part.
    pub fn agrees_with(&self, value: T, k: T) -> bool {
        (self.mean.re - value).abs() <= k * self.stderr
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientTrajectories { stderr: f64::INFINITY, limit: 0.0 });
    }
    Ok(())
}

/// Mean and standard error of complex samples, summed in index order.
fn estimate<T: Real>(samples: impl Iterator<Item = C<T>> + Clone) -> MomentEstimate<T> {
    let mut n = 0usize;
    let mut sum = C::new(T::zero(), T::zero());
    for z in samples.clone() {
        sum += z;
        n += 1;
    }
    let nt = T::from_count(n);
    let mean = sum / nt;
    let mut ss = T::zero();
    for z in samples {
        ss += (z - mean).norm_sqr();
    }
    let var = ss / T::from_count(n - 1);
    MomentEstimate { mean, stderr: (var / nt).sqrt() }
}

pub fn estimate_moments<T: Real>(
    points: &[PhaseSpacePoint<T>],
    moments: &[NormalMoment],
) -> Result<Vec<MomentEstimate<T>>> {
    check_len(points.len())?;
    Ok(moments.iter().map(|m| estimate(points.iter().map(|x| m.sample(x)))).collect())
}

/// `⟨a†_i a_i⟩`.
pub fn intensity<T: Real>(points: &[PhaseSpacePoint<T>], mode: usize) -> Result<MomentEstimate<T>> {
    Ok(estimate_moments(points, &[NormalMoment::number(mode)])?[0])
}

/// Per-sample Manley-Rowe combinations
/// `2N1 + 2N2 + N3 + N4 + N5 + N6`, `N6 − N3 + N2` and `N5 − N4 + N2`.
pub fn manley_rowe<T: Real>(x: &PhaseSpacePoint<T>) -> [C<T>; 3] {
    let n = |m| x.number(m);
    let two = T::lit(2.0);
    [
        n(1) * two + n(2) * two + n(3) + n(4) + n(5) + n(6),
        n(6) - n(3) + n(2),
        n(5) - n(4) + n(2),
    ]
}

/// Symmetrically ordered quadrature covariance of the low modes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureEstimate<T: Real> {
    pub mean: QuadVector<T>,
    pub cov: QuadMatrix<T>,
    pub stderr: QuadMatrix<T>,
    pub samples: usize,
}

/// Covariance of (X3, Y3, ..., X6, Y6) from stochastic quadratures.
///
/// The sample covariance of the stochastic quadratures is normally ordered;
/// adding the identity converts it to the symmetric ordering.
pub fn quadrature_covariance<T: Real>(points: &[PhaseSpacePoint<T>]) -> Result<QuadratureEstimate<T>> {
    check_len(points.len())?;
    let n = points.len();
    let nt = T::from_count(n);
    let qs: Vec<[C<T>; QUAD_DIM]> = points.iter().map(|x| x.quadratures()).collect();
    let mut mean = [C::new(T::zero(), T::zero()); QUAD_DIM];
    for q in &qs {
        for k in 0..QUAD_DIM {
            mean[k] += q[k];
        }
    }
    for m in mean.iter_mut() {
        *m /= nt;
    }
    let mut sum = QuadMatrix::<T>::zeros();
    let mut sum_sq = QuadMatrix::<T>::zeros();
    for q in &qs {
        for k in 0..QUAD_DIM {
            for l in k..QUAD_DIM {
                let z = ((q[k] - mean[k]) * (q[l] - mean[l])).re;
                sum[(k, l)] += z;
                sum_sq[(k, l)] += z * z;
            }
        }
    }
    let mut cov = QuadMatrix::zeros();
    let mut stderr = QuadMatrix::zeros();
    let dof = T::from_count(n - 1);
    for k in 0..QUAD_DIM {
        for l in k..QUAD_DIM {
            let c = sum[(k, l)] / dof;
            let m = sum[(k, l)] / nt;
            let var = ((sum_sq[(k, l)] / nt - m * m) * nt / dof).max(T::zero());
            let e = (var / nt).sqrt();
            let c = if k == l { c + T::one() } else { c };
            cov[(k, l)] = c;
            cov[(l, k)] = c;
            stderr[(k, l)] = e;
            stderr[(l, k)] = e;
        }
    }
    Ok(QuadratureEstimate {
        mean: QuadVector::from_fn(|k, _| mean[k].re),
        cov,
        stderr,
        samples: n,
    })
}

/// Symmetrically ordered variance of `c · Q`.
pub fn combo_variance<T: Real>(points: &[PhaseSpacePoint<T>], c: &QuadVector<T>) -> Result<MomentEstimate<T>> {
    check_len(points.len())?;
    let proj = |x: &PhaseSpacePoint<T>| {
        let q = x.quadratures();
        (0..QUAD_DIM).fold(C::new(T::zero(), T::zero()), |acc, k| acc + q[k] * c[k])
    };
    let mean = estimate(points.iter().map(proj)).mean;
    let centered = points.iter().map(move |x| {
        let d = proj(x) - mean;
        C::new((d * d).re, T::zero())
    });
    let mut est = estimate(centered);
    let n = T::from_count(points.len());
    est.mean = C::new(est.mean.re * n / (n - T::one()) + c.norm_squared(), T::zero());
    Ok(est)
}

/// `V(O_1)..V(O_4)` with standard errors.
pub fn joint_variances<T: Real>(points: &[PhaseSpacePoint<T>]) -> Result<[MomentEstimate<T>; 4]> {
    let spec = JointOperatorSpec::<T>::default();
    let v: Vec<_> = spec
        .combos
        .iter()
        .map(|c| combo_variance(points, c))
        .collect::<Result<_>>()?;
    Ok([v[0], v[1], v[2], v[3]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coherent_cloud() -> Vec<PhaseSpacePoint<f64>> {
        (0..10)
            .map(|k| {
                let mut x = PhaseSpacePoint::coherent_pumps(C::new(5.0, 0.0), C::new(3.0, 0.0));
                x.alpha[2] = C::new(1.0 + 0.1 * k as f64, 0.0);
                x.alpha_plus[2] = x.alpha[2];
                x
            })
            .collect()
    }

    #[test]
    fn coherent_samples_give_vacuum_covariance() {
        let pts: Vec<PhaseSpacePoint<f64>> = vec![PhaseSpacePoint::coherent_pumps(C::new(5.0, 0.0), C::new(3.0, 1.0)); 5];
        let q = quadrature_covariance(&pts).unwrap();
        assert_eq!(q.cov, QuadMatrix::identity());
        assert!(q.stderr.iter().all(|&e| e == 0.0));
        let n = intensity(&pts, 2).unwrap();
        assert!((n.mean.re - 10.0).abs() < 1e-12 && n.stderr == 0.0);
    }

    #[test]
    fn moments_follow_sample_statistics() {
        let pts = coherent_cloud();
        let m = estimate_moments(&pts, &[NormalMoment::number(3), NormalMoment::amplitude(3)]).unwrap();
        let vals: Vec<f64> = (0..10).map(|k| (1.0 + 0.1 * k as f64).powi(2)).collect();
        let vals: &[f64] = &vals;
        let mean = vals.iter().sum::<f64>() / 10.0;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0;
        assert!((m[0].mean.re - mean).abs() < 1e-12);
        assert!((m[0].stderr - (var / 10.0).sqrt()).abs() < 1e-12);
        assert!((m[1].mean.re - 1.45).abs() < 1e-12);
    }

    #[test]
    fn combo_variance_matches_covariance_quadratic_form() {
        let pts = coherent_cloud();
        let c = QuadVector::from_fn(|k, _| 0.3 * k as f64 - 0.5);
        let q = quadrature_covariance(&pts).unwrap();
        let v = combo_variance(&pts, &c).unwrap();
        assert!((v.mean.re - (c.transpose() * q.cov * c)[0]).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_rejected() {
        let pts = coherent_cloud();
        assert!(matches!(quadrature_covariance(&pts[..1]), Err(Error::InsufficientTrajectories { .. })));
        let est = intensity(&pts, 3).unwrap();
        assert!(est.require(1e-6).is_err());
        assert!(est.require(1.0).is_ok());
    }
}
