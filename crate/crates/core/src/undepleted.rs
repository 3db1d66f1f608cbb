//! Undepleted-pump evolution of the low-frequency modes without a cavity.
//!
//! The quadrature Heisenberg equations are linear with constant coefficients,
//! so the evolution over time `t` is the matrix exponential of the generator.
//! Variances of any linear combination follow from covariance algebra.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::model::{coupling_generator, golden_pair, CouplingGraph, QUAD_DIM};
use crate::quadrature::{x_combo, y_combo, CovarianceState, QuadMatrix, QuadVector};
use crate::scalar::Real;

/// Couplings `ξ_i = χ_i⟨a_i(0)⟩` and interaction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UndepletedParams<T> {
    pub xi1: T,
    pub xi2: T,
    pub t: T,
}

impl<T: Real> UndepletedParams<T> {
    pub fn new(xi1: T, xi2: T, t: T) -> Self {
        debug_assert!(xi1 >= T::zero() && xi2 >= T::zero() && t >= T::zero());
        Self { xi1, xi2, t }
    }

    pub fn symmetric(xi: T, t: T) -> Self {
        Self::new(xi, xi, t)
    }

    pub fn at(self, t: T) -> Self {
        Self { t, ..self }
    }

    /// Squeezing parameter `r = ξ1 t`.
    pub fn squeezing(&self) -> T {
        self.xi1 * self.t
    }
}

/// Generator `M` of `dQ/dt = M Q` over (X3, Y3, ..., X6, Y6).
pub fn quadrature_generator<T: Real>(xi1: T, xi2: T) -> QuadMatrix<T> {
    let k = coupling_generator(xi1, xi2);
    interleave(&k, &(-k))
}

/// Embed X-sector and Y-sector 4×4 blocks in the interleaved 8×8 ordering.
pub(crate) fn interleave<T: Real>(x_block: &Matrix4<T>, y_block: &Matrix4<T>) -> QuadMatrix<T> {
    let mut m = QuadMatrix::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(2 * i, 2 * j)] = x_block[(i, j)];
            m[(2 * i + 1, 2 * j + 1)] = y_block[(i, j)];
        }
    }
    m
}

/// Propagator `S(t) = exp(M t)` with `Q(t) = S(t) Q(0)`.
pub fn heisenberg_propagator<T: Real>(p: &UndepletedParams<T>) -> QuadMatrix<T> {
    (quadrature_generator(p.xi1, p.xi2) * p.t).exp()
}

/// `mean' = S mean`, `cov' = S cov Sᵀ`.
pub fn evolve_covariance<T: Real>(initial: &CovarianceState<T>, p: &UndepletedParams<T>) -> CovarianceState<T> {
    initial.transformed(&heisenberg_propagator(p))
}

/// Coefficient vectors of the squeezed joint operators `O1..O4`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOperatorSpec<T: Real> {
    pub combos: [QuadVector<T>; 4],
    /// Decay constant of each combination in units of `ξt`.
    pub decay: [T; 4],
}

impl<T: Real> Default for JointOperatorSpec<T> {
    fn default() -> Self {
        let (c1, c2) = golden_pair::<T>();
        let one = T::one();
        Self {
            combos: [
                x_combo([-c1, c1, -one, one]),
                x_combo([-c2, -c2, one, one]),
                y_combo([c1, c1, one, one]),
                y_combo([c2, -c2, -one, one]),
            ],
            decay: [c2, c1, c2, c1],
        }
    }
}

impl<T: Real> JointOperatorSpec<T> {
    pub fn variances(&self, state: &CovarianceState<T>) -> [T; 4] {
        self.combos.map(|c| state.variance_of(&c))
    }

    /// Vacuum variance, the squared norm of each coefficient vector.
    pub fn vacuum_variances(&self) -> [T; 4] {
        self.combos.map(|c| c.norm_squared())
    }
}

/// `V(O_1)..V(O_4)` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointVariances<T> {
    pub t: T,
    pub values: [T; 4],
}

/// Joint-operator variances from vacuum at every time in `t_grid`.
pub fn joint_operator_variances<T: Real>(p: &UndepletedParams<T>, t_grid: &[T]) -> Vec<JointVariances<T>> {
    let spec = JointOperatorSpec::default();
    let vacuum = CovarianceState::vacuum();
    let m = quadrature_generator(p.xi1, p.xi2);
    t_grid
        .iter()
        .map(|&t| {
            let state = vacuum.transformed(&(m * t).exp());
            JointVariances { t, values: spec.variances(&state) }
        })
        .collect()
}

/// Sense of the quarter-turn applied to modes 5 and 6 before comparing with
/// the cluster condition `Y − A X → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuarterTurn {
    /// Phase shift `a → i a`: `X' = −Y`, `Y' = X`.
    #[default]
    Positive,
    /// Phase shift `a → −i a`: `X' = Y`, `Y' = −X`.
    Negative,
}

/// Nullifier rows `Y'_m − Σ_n A_mn X'_n` in the original quadratures, with
/// modes 5 and 6 rotated by `turn`.
pub fn nullifier_vectors<T: Real>(graph: &CouplingGraph<T>, turn: QuarterTurn) -> [QuadVector<T>; 4] {
    let s = match turn {
        QuarterTurn::Positive => -T::one(),
        QuarterTurn::Negative => T::one(),
    };
    // (coefficient vector of X'_k, coefficient vector of Y'_k) for each low mode k.
    let rotated = |k: usize| -> (QuadVector<T>, QuadVector<T>) {
        let mut xq = QuadVector::zeros();
        let mut yq = QuadVector::zeros();
        if k >= 2 {
            xq[2 * k + 1] = s;
            yq[2 * k] = -s;
        } else {
            xq[2 * k] = T::one();
            yq[2 * k + 1] = T::one();
        }
        (xq, yq)
    };
    std::array::from_fn(|m| {
        let mut row = rotated(m).1;
        for n in 0..4 {
            row -= rotated(n).0 * graph.adjacency[(m, n)];
        }
        row
    })
}

/// Variances of the four cluster nullifiers of `state`.
pub fn cluster_residuals<T: Real>(state: &CovarianceState<T>, graph: &CouplingGraph<T>) -> [T; 4] {
    cluster_residuals_with(state, graph, QuarterTurn::default())
}

pub fn cluster_residuals_with<T: Real>(
    state: &CovarianceState<T>,
    graph: &CouplingGraph<T>,
    turn: QuarterTurn,
) -> [T; 4] {
    nullifier_vectors(graph, turn).map(|v| state.variance_of(&v))
}

const _: () = assert!(QUAD_DIM == 8);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_graph_matrices;
    use crate::quadrature::symplectic_form;
    use proptest::prelude::*;

    #[test]
    fn propagator_at_zero_is_identity() {
        let s = heisenberg_propagator(&UndepletedParams::symmetric(1.0f64, 0.0));
        assert!((s - QuadMatrix::identity()).amax() < 1e-15);
    }

    #[test]
    fn propagator_preserves_symplectic_form() {
        let s = heisenberg_propagator(&UndepletedParams::symmetric(1.0f64, 0.7));
        let omega = symplectic_form::<f64>();
        assert!((s * omega * s.transpose() - omega).amax() < 1e-12);
    }

    #[test]
    fn squeezed_combo_is_eigen_direction() {
        let (c1, c2) = golden_pair::<f64>();
        let s = heisenberg_propagator(&UndepletedParams::symmetric(1.0f64, 1.0));
        let v = x_combo([-c1, c1, -1.0, 1.0]);
        let mapped = s.transpose() * v;
        assert!((mapped - v * (-c2).exp()).amax() < 1e-12);
    }

    #[test]
    fn vacuum_stays_vacuum_at_zero_time() {
        let out = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0f64, 0.0));
        assert!((out.cov - QuadMatrix::identity()).amax() < 1e-15);
    }

    #[test]
    fn first_joint_variance_at_unit_time() {
        // sum of squared coefficients times exp(-2 c2)
        let (c1, c2) = golden_pair::<f64>();
        let state = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0, 1.0));
        let v = JointOperatorSpec::default().variances(&state)[0];
        let expected = 2.0 * (1.0 + c1 * c1) * (-2.0 * c2).exp();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.1087).abs() < 1e-3);
    }

    #[test]
    fn joint_variances_initial_values_and_pairing() {
        let (c1, c2) = golden_pair::<f64>();
        let grid: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let series = joint_operator_variances(&UndepletedParams::symmetric(1.0, 0.0), &grid);
        let v0 = series[0].values;
        assert!((v0[0] - 2.0 * (1.0 + c1 * c1)).abs() < 1e-14);
        assert!((v0[2] - 2.0 * (1.0 + c1 * c1)).abs() < 1e-14);
        assert!((v0[1] - 2.0 * (1.0 + c2 * c2)).abs() < 1e-14);
        assert!((v0[3] - 2.0 * (1.0 + c2 * c2)).abs() < 1e-14);
        for w in series.windows(2) {
            let (a, b) = (w[0].values, w[1].values);
            assert!((b[0] - b[2]).abs() <= 1e-12 * b[0].max(1e-300));
            assert!((b[1] - b[3]).abs() <= 1e-12 * b[1]);
            assert!((0..4).all(|i| b[i] < a[i]));
        }
    }

    #[test]
    fn joint_operator_eigen_relations() {
        let spec = JointOperatorSpec::<f64>::default();
        let m = quadrature_generator(1.0, 1.0);
        for (c, d) in spec.combos.iter().zip(spec.decay) {
            // d(cᵀQ)/dt = cᵀ M Q = -d · cᵀQ
            assert!((m.transpose() * c + c * d).amax() < 1e-12);
        }
    }

    #[test]
    fn vacuum_nullifier_residuals() {
        let graph = build_graph_matrices::<f64>();
        for r in cluster_residuals(&CovarianceState::vacuum(), &graph) {
            assert!((r - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn nullifiers_vanish_with_large_squeezing() {
        let graph = build_graph_matrices::<f64>();
        let mut last = [2.5; 4];
        for r in [1.0, 2.0, 4.0, 8.0] {
            let state = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0, r));
            let res = cluster_residuals(&state, &graph);
            assert!((0..4).all(|i| res[i] < last[i]), "{res:?}");
            last = res;
        }
        assert!(last.iter().all(|&v| v < 1e-3), "{last:?}");
    }

    #[test]
    fn opposite_quarter_turn_does_not_give_nullifiers() {
        let graph = build_graph_matrices::<f64>();
        let state = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0, 3.0));
        let r = cluster_residuals_with(&state, &graph, QuarterTurn::Negative);
        assert!(r.iter().all(|&v| v > 1.0));
    }

    #[test]
    fn nullifier_sums_are_joint_operators() {
        let (c1, c2) = golden_pair::<f64>();
        let graph = build_graph_matrices::<f64>();
        let n = nullifier_vectors(&graph, QuarterTurn::Positive);
        let o = JointOperatorSpec::<f64>::default().combos;
        assert!((n[2] - n[3] + o[0]).amax() < 1e-14);
        assert!((n[2] + n[3] - o[1]).amax() < 1e-14);
        assert!((n[0] + n[1] - o[2] * c2).amax() < 1e-14);
        assert!((n[0] - n[1] - o[3] * c1).amax() < 1e-14);
    }

    #[test]
    fn single_precision_evolution() {
        let state = evolve_covariance(&CovarianceState::<f32>::vacuum(), &UndepletedParams::symmetric(1.0f32, 1.0));
        let v = JointOperatorSpec::default().variances(&state)[0];
        assert!((v - 0.10868).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn symplectic_for_random_couplings(t in 0.0f64..5.0, xi1 in 0.0f64..2.0, xi2 in 0.0f64..2.0) {
            let s = heisenberg_propagator(&UndepletedParams::new(xi1, xi2, t));
            let omega = symplectic_form::<f64>();
            let err = (s * omega * s.transpose() - omega).amax();
            prop_assert!(err <= 1e-10 * s.amax().powi(2).max(1.0), "err {err}");
        }

        #[test]
        fn group_property(t1 in 0.0f64..2.5, t2 in 0.0f64..2.5, xi1 in 0.0f64..2.0, xi2 in 0.0f64..2.0) {
            let p = UndepletedParams::new(xi1, xi2, 0.0);
            let s12 = heisenberg_propagator(&p.at(t1 + t2));
            let prod = heisenberg_propagator(&p.at(t2)) * heisenberg_propagator(&p.at(t1));
            prop_assert!((s12 - prod).amax() <= 1e-10 * s12.amax().max(1.0));
        }

        #[test]
        fn evolved_vacuum_obeys_uncertainty(t in 0.0f64..3.0, xi1 in 0.0f64..1.5, xi2 in 0.0f64..1.5) {
            let out = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::new(xi1, xi2, t));
            prop_assert!(out.uncertainty_margin() >= -1e-9 * out.cov.amax().max(1.0));
        }
    }
}
