//! Optimized van Loock–Furusawa quadripartite entanglement witnesses.
//!
//! Three sums of variances,
//!
//! ```text
//! I36 = V(X3 − X6) + V(Y3 + g4 Y4 + g5 Y5 + Y6)
//! I45 = V(X4 − X5) + V(g3 Y3 + Y4 + Y5 + g6 Y6)
//! I56 = V(X5 − X6) + V(g3 Y3 + g4 Y4 + Y5 + Y6)
//! ```
//!
//! are each bounded below by 4 for any state that is not fully inseparable.
//! `g4, g5` minimize `I36` and `g3, g6` minimize `I45`; `I56` reuses them.
//!
//! The functions accept any symmetric 8×8 second-moment matrix over
//! (X3, Y3, ..., X6, Y6): a time-domain covariance or an output spectral matrix
//! evaluated at one frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::y_index;
use crate::quadrature::{combo, QuadMatrix, QuadVector, Quadrature};
use crate::scalar::Real;

/// Bound shared by the three inequalities.
pub const VLF_BOUND: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VlfGains<T> {
    pub g3: T,
    pub g4: T,
    pub g5: T,
    pub g6: T,
}

impl<T: Real> VlfGains<T> {
    pub fn new(g3: T, g4: T, g5: T, g6: T) -> Self {
        Self { g3, g4, g5, g6 }
    }

    pub fn uniform(g: T) -> Self {
        Self::new(g, g, g, g)
    }
}

/// Standard errors of the three correlations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlfStderr<T> {
    #[serde(rename = "I36_stderr")]
    pub i36: T,
    #[serde(rename = "I45_stderr")]
    pub i45: T,
    #[serde(rename = "I56_stderr")]
    pub i56: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VlfReport<T> {
    #[serde(rename = "I36")]
    pub i36: T,
    #[serde(rename = "I45")]
    pub i45: T,
    #[serde(rename = "I56")]
    pub i56: T,
    #[serde(flatten)]
    pub gains: VlfGains<T>,
    pub entangled: bool,
    #[serde(flatten, skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<VlfStderr<T>>,
}

impl<T: Real> VlfReport<T> {
    pub fn values(&self) -> [T; 3] {
        [self.i36, self.i45, self.i56]
    }

    pub fn max(&self) -> T {
        self.i36.max(self.i45).max(self.i56)
    }
}

/// Closed-form gains from the Y-sector covariances `V_ij`.
pub fn optimized_gains<T: Real>(cov: &QuadMatrix<T>) -> Result<VlfGains<T>> {
    let v = |i: usize, j: usize| cov[(y_index(i), y_index(j))];
    let den36 = v(3, 6) * v(3, 6) - v(3, 3) * v(6, 6);
    let den45 = v(4, 5) * v(4, 5) - v(4, 4) * v(5, 5);
    let tol = T::singular_tolerance();
    for den in [den36, den45] {
        if den.abs() < tol {
            return Err(Error::DegenerateCovariance { denominator: den.to_f64_lossy() });
        }
    }
    Ok(VlfGains {
        g3: (v(6, 6) * (v(3, 4) + v(3, 5)) - v(3, 6) * (v(4, 6) + v(5, 6))) / den36,
        g4: (v(5, 5) * (v(3, 4) + v(4, 6)) - v(4, 5) * (v(3, 5) + v(5, 6))) / den45,
        g5: (v(4, 4) * (v(3, 5) + v(5, 6)) - v(4, 5) * (v(3, 4) + v(4, 6))) / den45,
        g6: (v(3, 3) * (v(4, 6) + v(5, 6)) - v(3, 6) * (v(3, 4) + v(3, 5))) / den36,
    })
}

/// The (X-part, Y-part) combination vectors of `I36`, `I45`, `I56`.
pub fn witness_combos<T: Real>(g: &VlfGains<T>) -> [(QuadVector<T>, QuadVector<T>); 3] {
    use Quadrature::{X, Y};
    let one = T::one();
    [
        (
            combo(&[(X, 3, one), (X, 6, -one)]),
            combo(&[(Y, 3, one), (Y, 4, g.g4), (Y, 5, g.g5), (Y, 6, one)]),
        ),
        (
            combo(&[(X, 4, one), (X, 5, -one)]),
            combo(&[(Y, 3, g.g3), (Y, 4, one), (Y, 5, one), (Y, 6, g.g6)]),
        ),
        (
            combo(&[(X, 5, one), (X, 6, -one)]),
            combo(&[(Y, 3, g.g3), (Y, 4, g.g4), (Y, 5, one), (Y, 6, one)]),
        ),
    ]
}

fn quad_form<T: Real>(cov: &QuadMatrix<T>, c: &QuadVector<T>) -> T {
    (c.transpose() * cov * c)[(0, 0)]
}

/// Evaluate the three correlations at the given gains.
pub fn vlf_correlations<T: Real>(cov: &QuadMatrix<T>, gains: &VlfGains<T>) -> VlfReport<T> {
    let [i36, i45, i56] = witness_combos(gains).map(|(a, b)| quad_form(cov, &a) + quad_form(cov, &b));
    let bound = T::lit(VLF_BOUND);
    VlfReport {
        i36,
        i45,
        i56,
        gains: *gains,
        entangled: i36 < bound && i45 < bound && i56 < bound,
        stderr: None,
    }
}

/// Optimize the gains and evaluate the correlations.
pub fn optimized_report<T: Real>(cov: &QuadMatrix<T>) -> Result<VlfReport<T>> {
    let gains = optimized_gains(cov)?;
    Ok(vlf_correlations(cov, &gains))
}

/// Linear error propagation of independent per-entry standard errors of `cov`.
///
/// `cov_stderr[(k, l)]` is the standard error of the estimate of `V_kl`; the
/// gains are treated as fixed, which for `I36` and `I45` is exact to first
/// order because they sit at a stationary point.
pub fn propagate_stderr<T: Real>(cov_stderr: &QuadMatrix<T>, gains: &VlfGains<T>) -> VlfStderr<T> {
    let [i36, i45, i56] = witness_combos(gains).map(|(a, b)| {
        let mut acc = T::zero();
        for k in 0..8 {
            for l in k..8 {
                let mut d = a[k] * a[l] + b[k] * b[l];
                if k != l {
                    d *= T::lit(2.0);
                }
                let term = d * cov_stderr[(k, l)];
                acc += term * term;
            }
        }
        acc.sqrt()
    });
    VlfStderr { i36, i45, i56 }
}

/// Optimized report carrying propagated standard errors.
pub fn optimized_report_with_stderr<T: Real>(cov: &QuadMatrix<T>, cov_stderr: &QuadMatrix<T>) -> Result<VlfReport<T>> {
    let mut report = optimized_report(cov)?;
    report.stderr = Some(propagate_stderr(cov_stderr, &report.gains));
    Ok(report)
}
