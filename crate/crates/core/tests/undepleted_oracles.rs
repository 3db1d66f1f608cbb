use quadopo::quadrature::{CovarianceState, QuadMatrix};
use quadopo::undepleted::{
    cluster_residuals, evolve_covariance, heisenberg_propagator, joint_operator_variances, quadrature_generator,
};
use quadopo::vlf::optimized_report;
use quadopo::{build_graph_matrices, UndepletedParams};

/// Propagator from integrating dS/dt = M S with RK4.
fn rk4_propagator(m: &QuadMatrix<f64>, t: f64, steps: usize) -> QuadMatrix<f64> {
    let h = t / steps as f64;
    let mut s = QuadMatrix::identity();
    for _ in 0..steps {
        let k1 = m * s;
        let k2 = m * (s + k1 * (h / 2.0));
        let k3 = m * (s + k2 * (h / 2.0));
        let k4 = m * (s + k3 * h);
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    s
}

#[test]
fn matrix_exponential_agrees_with_ode_integration() {
    for &(xi1, xi2, t) in &[(1.0, 1.0, 0.5), (1.0, 1.0, 2.5), (1.0, 0.5, 1.7), (0.3, 1.2, 3.0)] {
        let exact = heisenberg_propagator(&UndepletedParams::new(xi1, xi2, t));
        let ode = rk4_propagator(&quadrature_generator(xi1, xi2), t, 20_000);
        let rel = (exact - ode).amax() / exact.amax();
        assert!(rel < 1e-8, "xi=({xi1},{xi2}) t={t}: {rel:e}");
    }
}

#[test]
fn evolved_states_remain_physical() {
    for k in 0..20 {
        let t = 0.15 * k as f64;
        let st = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::new(1.0, 0.5, t));
        assert!(st.is_symmetric(1e-9));
        assert!(st.uncertainty_margin() > -1e-8 * st.cov.amax());
    }
}

#[test]
fn entanglement_appears_immediately() {
    let st = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0, 0.05));
    let r = optimized_report(&st.cov).unwrap();
    assert!(r.entangled, "{r:?}");
}

#[test]
fn joint_operators_pair_up_and_decay() {
    let grid: Vec<f64> = (0..30).map(|k| 0.1 * k as f64).collect();
    let series = joint_operator_variances(&UndepletedParams::symmetric(1.0, 0.0), &grid);
    for w in series.windows(2) {
        let (a, b) = (w[0].values, w[1].values);
        assert!((a[0] - a[2]).abs() < 1e-9 && (a[1] - a[3]).abs() < 1e-9);
        assert!(b.iter().zip(a).all(|(x, y)| *x < y));
    }
}

#[test]
fn nullifiers_vanish_at_large_squeezing() {
    let graph = build_graph_matrices::<f64>();
    let residual = |r: f64| {
        let st = evolve_covariance(&CovarianceState::vacuum(), &UndepletedParams::symmetric(1.0, r));
        cluster_residuals(&st, &graph).iter().fold(0.0f64, |m, x| m.max(*x))
    };
    assert!(residual(0.0) > 1.0);
    assert!(residual(4.0) < 0.05, "{}", residual(4.0));
    assert!(residual(8.0) < residual(4.0) / 50.0);
}
