use nalgebra::SMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{fluct_index, FluctMatrix, LinearizedModel, C, FLUCT_DIM};
use crate::error::{Error, Result};
use crate::model::QUAD_DIM;
use crate::quadrature::QuadMatrix;
use crate::scalar::Real;
use crate::vlf::{optimized_report, VlfReport};

/// Analysis frequencies in units of `γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid<T> {
    pub omega: Vec<T>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn linear(start: T, end: T, n: usize) -> Self {
        assert!(n >= 2);
        let step = (end - start) / T::from_count(n - 1);
        Self { omega: (0..n).map(|k| start + step * T::from_count(k)).collect() }
    }

    /// `n_log` logarithmically spaced points on `[min, split)` followed by
    /// `n_lin` linear points on `[split, max]`.
    pub fn log_linear(min: T, split: T, max: T, n_log: usize, n_lin: usize) -> Self {
        assert!(min > T::zero() && split > min && max > split && n_log >= 1 && n_lin >= 2);
        let (lmin, lsplit) = (min.ln(), split.ln());
        let mut omega: Vec<T> = (0..n_log)
            .map(|k| (lmin + (lsplit - lmin) * T::from_count(k) / T::from_count(n_log)).exp())
            .collect();
        omega.extend(Self::linear(split, max, n_lin).omega);
        Self { omega }
    }

    /// Default grid: fine logarithmic resolution below `0.1γ`, linear to `5γ`.
    pub fn standard() -> Self {
        Self::log_linear(T::lit(1e-4), T::lit(0.1), T::lit(5.0), 120, 491)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// `S(ω) = (Ā + iω)⁻¹ B̄B̄ᵀ (Āᵀ − iω)⁻¹`.
pub fn intracavity_spectrum<T: Real>(model: &LinearizedModel<T>, omega: T) -> Result<FluctMatrix<T>> {
    if !model.stable {
        return Err(Error::UnstableModel { min_real: model.min_real_eigenvalue().to_f64_lossy() });
    }
    let iw = FluctMatrix::<T>::identity() * C::new(T::zero(), omega);
    let left = (model.drift + iw)
        .try_inverse()
        .ok_or(Error::UnstableModel { min_real: 0.0 })?;
    let right = (model.drift.transpose() - iw)
        .try_inverse()
        .ok_or(Error::UnstableModel { min_real: 0.0 })?;
    Ok(left * model.diffusion() * right)
}

/// Map from fluctuations to (X3, Y3, ..., X6, Y6): `X = α + α⁺`, `Y = −i(α − α⁺)`.
fn quadrature_map<T: Real>() -> SMatrix<C<T>, QUAD_DIM, FLUCT_DIM> {
    let one = C::new(T::one(), T::zero());
    let i = C::new(T::zero(), T::one());
    let mut t = SMatrix::zeros();
    for k in 0..4 {
        let mode = k + 3;
        let (a, ap) = (fluct_index(mode, false), fluct_index(mode, true));
        t[(2 * k, a)] = one;
        t[(2 * k, ap)] = one;
        t[(2 * k + 1, a)] = -i;
        t[(2 * k + 1, ap)] = i;
    }
    t
}

/// Normally-ordered intracavity spectrum in the quadrature basis, symmetrized
/// and reduced to its real part.
pub fn intracavity_quadrature_spectrum<T: Real>(s: &FluctMatrix<T>) -> QuadMatrix<T> {
    let t = quadrature_map::<T>();
    let sq = t * s * t.transpose();
    QuadMatrix::from_fn(|k, l| (sq[(k, l)].re + sq[(l, k)].re) * T::lit(0.5))
}

/// Output spectral matrix: `S^out_kk = 1 + 2γ S_kk`, `S^out_kl = 2√(γ_k γ_l) S_kl`.
pub fn output_quadrature_spectrum<T: Real>(model: &LinearizedModel<T>, omega: T) -> Result<QuadMatrix<T>> {
    let s = intracavity_spectrum(model, omega)?;
    Ok(output_from_intracavity(model, &intracavity_quadrature_spectrum(&s)))
}

fn output_from_intracavity<T: Real>(model: &LinearizedModel<T>, sq: &QuadMatrix<T>) -> QuadMatrix<T> {
    let gamma = |k: usize| model.params.gamma[k / 2 + 2];
    let two = T::lit(2.0);
    QuadMatrix::from_fn(|k, l| {
        let cross = two * (gamma(k) * gamma(l)).sqrt() * sq[(k, l)];
        if k == l { T::one() + cross } else { cross }
    })
}

/// Spectra and per-frequency optimized VLF correlations over a grid.
#[derive(Debug, Clone)]
pub struct SpectrumSeries<T: Real> {
    pub omega_grid: Vec<T>,
    pub s_intra: Vec<FluctMatrix<T>>,
    pub s_out_quadrature: Vec<QuadMatrix<T>>,
    pub i_out: Vec<VlfReport<T>>,
    pub stable: bool,
}

impl<T: Real> SpectrumSeries<T> {
    /// Minimum of each correlation over the grid with the frequency at which it occurs.
    pub fn minima(&self) -> [(T, T); 3] {
        std::array::from_fn(|k| {
            self.i_out
                .iter()
                .zip(&self.omega_grid)
                .map(|(r, &w)| (r.values()[k], w))
                .fold((T::lit(f64::INFINITY), T::zero()), |best, cur| if cur.0 < best.0 { cur } else { best })
        })
    }

    pub fn maxima(&self) -> [T; 3] {
        std::array::from_fn(|k| {
            self.i_out.iter().map(|r| r.values()[k]).fold(T::lit(f64::NEG_INFINITY), |m, x| m.max(x))
        })
    }
}

type SpectrumRow<T> = (FluctMatrix<T>, QuadMatrix<T>, VlfReport<T>);

/// Output spectra with gains re-optimized at every frequency.
pub fn output_spectra<T: Real>(model: &LinearizedModel<T>, grid: &FrequencyGrid<T>) -> Result<SpectrumSeries<T>> {
    let rows: Vec<Result<SpectrumRow<T>>> = grid
        .omega
        .par_iter()
        .map(|&w| {
            let s = intracavity_spectrum(model, w)?;
            let out = output_from_intracavity(model, &intracavity_quadrature_spectrum(&s));
            let report = optimized_report(&out)?;
            Ok((s, out, report))
        })
        .collect();
    let mut series = SpectrumSeries {
        omega_grid: grid.omega.clone(),
        s_intra: Vec::with_capacity(rows.len()),
        s_out_quadrature: Vec::with_capacity(rows.len()),
        i_out: Vec::with_capacity(rows.len()),
        stable: model.stable,
    };
    for row in rows {
        let (s, out, report) = row?;
        series.s_intra.push(s);
        series.s_out_quadrature.push(out);
        series.i_out.push(report);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearized::{assemble, steady_state};
    use crate::model::SystemParams;
    use nalgebra::SymmetricEigen;

    fn model(ratio: f64) -> LinearizedModel<f64> {
        let p = SystemParams::symmetric_at_ratio(0.01, 1.0, ratio);
        assemble(&p, &steady_state(&p).unwrap())
    }

    #[test]
    fn scalar_ou_analogue() {
        // 1x1 version of the formula
        let (g, s, w) = (0.7f64, 0.3f64, 1.3f64);
        let a = nalgebra::Matrix1::new(C::new(g, 0.0));
        let iw = C::new(0.0, w);
        let val = (a[(0, 0)] + iw).inv() * s * s * (a[(0, 0)] - iw).inv();
        assert!((val.re - s * s / (g * g + w * w)).abs() < 1e-15);
        assert!(val.im.abs() < 1e-15);
    }

    #[test]
    fn spectrum_vanishes_at_high_frequency() {
        let m = model(0.5);
        let s = intracavity_spectrum(&m, 1e4).unwrap();
        assert!(s.camax() < 1e-6);
    }

    #[test]
    fn empty_cavity_is_shot_noise_limited() {
        let m = model(0.0);
        let grid = FrequencyGrid::linear(0.0, 5.0, 11);
        let series = output_spectra(&m, &grid).unwrap();
        for (out, r) in series.s_out_quadrature.iter().zip(&series.i_out) {
            assert!((out - QuadMatrix::identity()).amax() < 1e-14);
            assert!(r.values().iter().all(|&v| (v - 4.0).abs() < 1e-12));
        }
    }

    #[test]
    fn unstable_model_is_rejected() {
        let p = SystemParams::<f64>::symmetric_at_ratio(0.01, 1.0, 1.2);
        let m = assemble(&p, &crate::linearized::SteadyState::trivial(&p));
        assert!(matches!(intracavity_spectrum(&m, 1.0), Err(Error::UnstableModel { .. })));
    }

    #[test]
    fn output_spectrum_is_physical() {
        let m = model(0.9);
        for w in [0.0, 0.01, 0.3, 1.0, 3.0] {
            let out = output_quadrature_spectrum(&m, w).unwrap();
            assert!((out - out.transpose()).amax() < 1e-9);
            let min = SymmetricEigen::new(out).eigenvalues.min();
            assert!(min >= -1e-9, "omega {w}: {min}");
        }
    }

    #[test]
    fn grid_shapes() {
        let g = FrequencyGrid::<f64>::log_linear(1e-3, 0.1, 2.0, 10, 5);
        assert_eq!(g.len(), 15);
        assert!(g.omega.windows(2).all(|w| w[1] > w[0]));
        assert!((g.omega[0] - 1e-3).abs() < 1e-15);
        assert!((g.omega[14] - 2.0).abs() < 1e-12);
    }
}
