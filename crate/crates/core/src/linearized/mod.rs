//! Linearized fluctuation analysis of the pumped cavity.
//!
//! Fluctuations `δα = (δα1, δα1⁺, ..., δα6, δα6⁺)` around a classical steady
//! state obey the Ornstein–Uhlenbeck equation `dδα = −Ā δα dt + B̄ dW`.
//! Its stationary spectrum, mapped through the cavity input-output relations,
//! gives measurable output correlations fed into the VLF witnesses.

mod drift;
mod scan;
mod spectrum;
mod steady;

pub use drift::{
    assemble, closed_form_eigenvalues, fluct_index, locate_threshold, noise_matrix, AuditDump,
    LinearizedModel, FLUCT_DIM,
};
pub use scan::{threshold_scan, ScanOptions, ScanPoint, ScanStatus};
pub use spectrum::{
    intracavity_quadrature_spectrum, intracavity_spectrum, output_quadrature_spectrum, output_spectra, FrequencyGrid, SpectrumSeries,
};
pub use steady::{mean_field_drift, steady_state, SteadyState};

use nalgebra::{Complex, SMatrix, SVector};

pub type C<T> = Complex<T>;
pub type FluctMatrix<T> = SMatrix<Complex<T>, FLUCT_DIM, FLUCT_DIM>;
pub type FluctVector<T> = SVector<Complex<T>, FLUCT_DIM>;
