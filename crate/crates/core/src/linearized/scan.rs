use serde::Serialize;

use super::{assemble, output_spectra, steady_state, FrequencyGrid};
use crate::error::{Error, Result};
use crate::model::{critical_pump, SystemParams};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct ScanOptions<T> {
    pub grid: FrequencyGrid<T>,
    /// Points with `|ε/ε_c − 1|` below this are skipped.
    pub exclusion: T,
    /// Injected signal used above threshold.
    pub injection: T,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self { grid: FrequencyGrid::standard(), exclusion: T::lit(0.005), injection: T::lit(0.5) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanStatus {
    Valid,
    /// Inside the excluded neighbourhood of the threshold.
    NearThreshold,
    /// The linearized model is unstable or the steady state failed.
    Invalid,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint<T> {
    pub eps_ratio: T,
    pub status: ScanStatus,
    pub reason: Option<String>,
    /// Minimum over ω of (I36, I45, I56).
    pub min: [T; 3],
    pub argmin_omega: [T; 3],
    /// Maximum over ω of (I36, I45, I56).
    pub max: [T; 3],
}

impl<T: Real> ScanPoint<T> {
    fn invalid(eps_ratio: T, status: ScanStatus, reason: Option<String>) -> Self {
        let nan = T::lit(f64::NAN);
        Self { eps_ratio, status, reason, min: [nan; 3], argmin_omega: [nan; 3], max: [nan; 3] }
    }
}

/// Minimum output correlations over frequency for each pump ratio.
///
/// `base` fixes χ, γ; its pumps are overwritten. Above threshold the
/// injection from `options` is switched on.
pub fn threshold_scan<T: Real>(base: &SystemParams<T>, ratios: &[T], options: &ScanOptions<T>) -> Result<Vec<ScanPoint<T>>> {
    let ec = critical_pump(base)?;
    Ok(ratios.iter().map(|&ratio| scan_point(base, ec, ratio, options)).collect())
}

fn scan_point<T: Real>(base: &SystemParams<T>, ec: T, ratio: T, options: &ScanOptions<T>) -> ScanPoint<T> {
    if (ratio - T::one()).abs() < options.exclusion {
        return ScanPoint::invalid(ratio, ScanStatus::NearThreshold, None);
    }
    let mut params = base.with_pump(ratio * ec);
    params.eps3_injected = if ratio > T::one() { options.injection } else { T::zero() };
    let run = || -> Result<ScanPoint<T>> {
        let steady = steady_state(&params)?;
        let model = assemble(&params, &steady);
        if !model.stable {
            return Err(Error::UnstableModel { min_real: model.min_real_eigenvalue().to_f64_lossy() });
        }
        let series = output_spectra(&model, &options.grid)?;
        let minima = series.minima();
        Ok(ScanPoint {
            eps_ratio: ratio,
            status: ScanStatus::Valid,
            reason: None,
            min: minima.map(|m| m.0),
            argmin_omega: minima.map(|m| m.1),
            max: series.maxima(),
        })
    };
    run().unwrap_or_else(|e| ScanPoint::invalid(ratio, ScanStatus::Invalid, Some(e.name().to_string())))
}
