//! System parameters, mode conventions and the coupling graph.
//!
//! Modes are numbered as in the optical setup: 1 and 2 are the pumps, 3 to 6
//! the low-frequency downconverted modes. Everything is dimensionless, with
//! time in units of `1/γ` and analysis frequency in units of `γ`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{golden_major, golden_minor, Real};

/// Number of optical modes.
pub const NUM_MODES: usize = 6;
/// Number of low-frequency modes (3, 4, 5, 6).
pub const NUM_LOW: usize = 4;
/// Length of a (X3, Y3, ..., X6, Y6) quadrature vector.
pub const QUAD_DIM: usize = 8;

/// Position of low mode `mode` (3..=6) in the low-mode ordering.
#[inline]
pub fn low_index(mode: usize) -> usize {
    debug_assert!((3..=6).contains(&mode), "mode {mode} is not a low-frequency mode");
    mode - 3
}

/// Index of `X_mode` in the quadrature vector.
#[inline]
pub fn x_index(mode: usize) -> usize {
    2 * low_index(mode)
}

/// Index of `Y_mode` in the quadrature vector.
#[inline]
pub fn y_index(mode: usize) -> usize {
    2 * low_index(mode) + 1
}

/// Physical parameters of the intracavity scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SystemParams<T> {
    /// Nonlinearity of the processes pumped by mode 1 (1 → 3+6, 1 → 4+5).
    pub chi1: T,
    /// Nonlinearity of the process pumped by mode 2 (2 → 5+6).
    pub chi2: T,
    /// Cavity loss rates of modes 1 to 6.
    pub gamma: [T; NUM_MODES],
    pub eps1: T,
    pub eps2: T,
    /// Coherent drive on mode 3; zero disables injection.
    pub eps3_injected: T,
}

impl<T: Real> Default for SystemParams<T> {
    fn default() -> Self {
        Self::symmetric(T::lit(0.01), T::one(), T::zero())
    }
}

impl<T: Real> SystemParams<T> {
    /// χ1 = χ2 = χ, all γ_i = γ, ε1 = ε2 = ε, no injection.
    pub fn symmetric(chi: T, gamma: T, eps: T) -> Self {
        Self {
            chi1: chi,
            chi2: chi,
            gamma: [gamma; NUM_MODES],
            eps1: eps,
            eps2: eps,
            eps3_injected: T::zero(),
        }
    }

    /// Symmetric parameters with the pump set to `ratio · ε_c`.
    pub fn symmetric_at_ratio(chi: T, gamma: T, ratio: T) -> Self {
        let eps = ratio * critical_pump_symmetric(chi, gamma);
        Self::symmetric(chi, gamma, eps)
    }

    pub fn with_injection(mut self, eps3: T) -> Self {
        self.eps3_injected = eps3;
        self
    }

    pub fn with_pump(mut self, eps: T) -> Self {
        self.eps1 = eps;
        self.eps2 = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: T| v.to_f64_lossy().is_finite();
        if !(self.chi1 > T::zero() && self.chi2 > T::zero()) {
            return Err(Error::InvalidParams("nonlinearities must be positive".into()));
        }
        if let Some(i) = self.gamma.iter().position(|&g| !(g > T::zero()) || !finite(g)) {
            return Err(Error::InvalidParams(format!("gamma{} must be positive", i + 1)));
        }
        if !(self.eps3_injected >= T::zero()) {
            return Err(Error::InvalidParams("injected signal amplitude must be non-negative".into()));
        }
        if ![self.chi1, self.chi2, self.eps1, self.eps2, self.eps3_injected]
            .into_iter()
            .all(finite)
        {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Common (χ, γ, ε) when the parameters are symmetric.
    pub fn symmetric_values(&self) -> Option<(T, T, T)> {
        let close = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * (a.abs() + b.abs()).max(T::one());
        let g = self.gamma[0];
        let sym = close(self.chi1, self.chi2)
            && self.gamma.iter().all(|&gi| close(gi, g))
            && close(self.eps1, self.eps2);
        sym.then_some((self.chi1, g, self.eps1))
    }

    /// Pump-enhanced couplings `ξ_i = χ_i ε_i / γ_i` of the trivial steady state.
    pub fn below_threshold_couplings(&self) -> (T, T) {
        (
            self.chi1 * self.eps1 / self.gamma[0],
            self.chi2 * self.eps2 / self.gamma[1],
        )
    }

    /// `ε / ε_c` for symmetric parameters.
    pub fn pump_ratio(&self) -> Result<T> {
        Ok(self.eps1 / critical_pump(self)?)
    }
}

/// Oscillation threshold `ε_c = (γ²/χ)·2/(1+√5)` of the symmetric configuration.
pub fn critical_pump<T: Real>(params: &SystemParams<T>) -> Result<T> {
    let (chi, gamma, _) = params.symmetric_values().ok_or_else(|| {
        Error::Asymmetric("threshold formula holds only for χ1=χ2, equal γ_i and ε1=ε2".into())
    })?;
    Ok(critical_pump_symmetric(chi, gamma))
}

pub fn critical_pump_symmetric<T: Real>(chi: T, gamma: T) -> T {
    gamma * gamma / chi * (T::lit(2.0) / (T::one() + T::lit(5.0).sqrt()))
}

/// Downconversion graph over modes (3, 4, 5, 6) and the weighted
/// cluster adjacency used for nullifier checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph<T: Real> {
    /// Unweighted coupling graph: an edge per downconversion pair.
    pub g: Matrix4<i32>,
    /// Weighted adjacency defining the target cluster state.
    pub adjacency: Matrix4<T>,
}

impl<T: Real> CouplingGraph<T> {
    /// The graph of this scheme with the weighted square-cluster adjacency.
    pub fn square_cluster() -> Self {
        let g = Matrix4::new(
            0, 0, 0, 1, //
            0, 0, 1, 0, //
            0, 1, 0, 1, //
            1, 0, 1, 0,
        );
        let h = T::lit(0.5);
        let s = T::lit(5.0).sqrt() * h;
        let z = T::zero();
        let adjacency = Matrix4::new(
            z, z, h, s, //
            z, z, s, h, //
            h, s, z, z, //
            s, h, z, z,
        );
        Self { g, adjacency }
    }

    /// Substitute a different cluster adjacency.
    pub fn with_adjacency(mut self, adjacency: Matrix4<T>) -> Self {
        self.adjacency = adjacency;
        self
    }

    pub fn g_real(&self) -> Matrix4<T> {
        self.g.map(|v| T::lit(v as f64))
    }

    /// Entry of `G` addressed by physical mode numbers.
    pub fn edge(&self, m: usize, n: usize) -> i32 {
        self.g[(low_index(m), low_index(n))]
    }

    pub fn weight(&self, m: usize, n: usize) -> T {
        self.adjacency[(low_index(m), low_index(n))]
    }
}

/// Build the coupling graph and the cluster adjacency.
pub fn build_graph_matrices<T: Real>() -> CouplingGraph<T> {
    CouplingGraph::square_cluster()
}

/// X-quadrature generator of the undepleted Heisenberg equations,
/// `dX/dt = K X` over (X3, X4, X5, X6); the Y sector evolves with `−K`.
pub fn coupling_generator<T: Real>(xi1: T, xi2: T) -> Matrix4<T> {
    let z = T::zero();
    Matrix4::new(
        z, z, z, xi1, //
        z, z, xi1, z, //
        z, xi1, z, xi2, //
        xi1, z, xi2, z,
    )
}

/// The golden-ratio pair `(c1, c2)` that forms the spectrum of `G`.
pub fn golden_pair<T: Real>() -> (T, T) {
    (golden_minor(), golden_major())
}

/// Quadrature convention `X = a + a†`, `Y = −i(a − a†)`, `[X, Y] = 2i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadratureConvention;

impl QuadratureConvention {
    pub const VACUUM_VARIANCE: f64 = 1.0;
    /// `[X, Y] = COMMUTATOR · i`.
    pub const COMMUTATOR: f64 = 2.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn graph_matches_printed_matrices() {
        let graph = build_graph_matrices::<f64>();
        assert_eq!(graph.edge(3, 6), 1);
        assert_eq!(graph.edge(3, 4), 0);
        assert_eq!(graph.edge(4, 5), 1);
        assert_eq!(graph.edge(5, 6), 1);
        assert_eq!(graph.g, graph.g.transpose());
        assert!((0..4).all(|i| graph.g[(i, i)] == 0));
        assert_eq!(graph.g.iter().filter(|&&v| v == 1).count(), 6);
        assert_eq!(graph.weight(3, 5), 0.5);
        assert!((graph.weight(3, 6) - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(graph.adjacency, graph.adjacency.transpose());
    }

    #[test]
    fn graph_spectrum_is_golden_pair() {
        let graph = build_graph_matrices::<f64>();
        let mut eig: Vec<f64> = SymmetricEigen::new(graph.g_real()).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (c1, c2) = golden_pair::<f64>();
        let expected = [-c2, -c1, c1, c2];
        for (e, x) in eig.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{e} vs {x}");
        }
        assert!((c1 * c2 - 1.0).abs() < 1e-15);
        assert!((c2 - c1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn critical_pump_values() {
        let p = SystemParams::<f64>::symmetric(0.01, 1.0, 0.0);
        let ec = critical_pump(&p).unwrap();
        assert!((ec - 61.8).abs() < 0.005);
        let p2 = SystemParams::<f64>::symmetric(0.01, 2.0, 0.0);
        assert!((critical_pump(&p2).unwrap() - 4.0 * ec).abs() < 1e-9);
        assert!((critical_pump(&p2).unwrap() - 247.2).abs() < 0.02);
    }

    #[test]
    fn critical_pump_monotone() {
        let base = critical_pump_symmetric(0.01f64, 1.0);
        assert!(critical_pump_symmetric(0.01f64, 1.1) > base);
        assert!(critical_pump_symmetric(0.011f64, 1.0) < base);
    }

    #[test]
    fn critical_pump_rejects_asymmetric() {
        let mut p = SystemParams::<f64>::symmetric(0.01, 1.0, 10.0);
        p.chi2 = 0.02;
        assert!(matches!(critical_pump(&p), Err(Error::Asymmetric(_))));
        let mut p = SystemParams::<f64>::symmetric(0.01, 1.0, 10.0);
        p.gamma[4] = 1.5;
        assert!(critical_pump(&p).is_err());
        let mut p = SystemParams::<f64>::symmetric(0.01, 1.0, 10.0);
        p.eps2 = 3.0;
        assert!(critical_pump(&p).is_err());
    }

    #[test]
    fn critical_pump_single_precision() {
        let ec = critical_pump_symmetric(0.01f32, 1.0);
        assert!((ec - 61.803_4).abs() < 1e-3);
    }

    #[test]
    fn validation() {
        assert!(SystemParams::<f64>::default().validate().is_ok());
        let mut p = SystemParams::<f64>::default();
        p.gamma[2] = 0.0;
        assert!(p.validate().is_err());
        let p = SystemParams::<f64>::default().with_injection(-1.0);
        assert!(p.validate().is_err());
        let mut p = SystemParams::<f64>::default();
        p.chi1 = -0.01;
        assert!(p.validate().is_err());
    }

    #[test]
    fn generator_is_scaled_graph() {
        let graph = build_graph_matrices::<f64>();
        assert_eq!(coupling_generator(1.0, 1.0), graph.g_real());
    }
}
