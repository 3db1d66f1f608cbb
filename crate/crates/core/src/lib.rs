//! Entanglement and cluster-state analysis of a single optical parametric
//! oscillator with quadruply concurrent downconversion.
//!
//! * [`model`]: parameters, mode conventions, coupling graph, threshold.
//! * [`undepleted`]: analytic undepleted-pump evolution and joint operators.
//! * [`vlf`]: optimized van Loock–Furusawa witnesses.
//! * [`positive_p`]: positive-P stochastic trajectories and moment estimation.
//! * [`linearized`]: steady states, drift/noise matrices and output spectra.
//!
//! All numerics are generic over [`Real`]; the `*64` and `*32` aliases below
//! fix the precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod linearized;
pub mod model;
pub mod positive_p;
pub mod quadrature;
pub mod scalar;
pub mod undepleted;
pub mod vlf;

pub use error::{Error, Result};
pub use model::{build_graph_matrices, critical_pump, CouplingGraph, SystemParams};
pub use quadrature::CovarianceState;
pub use scalar::Real;
pub use undepleted::UndepletedParams;
pub use vlf::{VlfGains, VlfReport};

pub type SystemParams64 = SystemParams<f64>;
pub type SystemParams32 = SystemParams<f32>;
pub type CovarianceState64 = CovarianceState<f64>;
pub type CovarianceState32 = CovarianceState<f32>;
pub type CouplingGraph64 = CouplingGraph<f64>;
pub type UndepletedParams64 = UndepletedParams<f64>;
pub type VlfReport64 = VlfReport<f64>;
pub type LinearizedModel64 = linearized::LinearizedModel<f64>;
pub type SpectrumSeries64 = linearized::SpectrumSeries<f64>;
pub type TrajectoryEnsemble64 = positive_p::TrajectoryEnsemble<f64>;
