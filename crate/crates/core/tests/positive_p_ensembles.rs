use quadopo::linearized::steady_state;
use quadopo::positive_p::{
    estimate_moments, intensity, InitialState, quadrature_covariance, simulate, NormalMoment, SimConfig, Snapshot,
};
use quadopo::quadrature::QuadMatrix;
use quadopo::SystemParams;

fn last(snaps: &[Snapshot<f64>]) -> &Snapshot<f64> {
    snaps.last().unwrap()
}

#[test]
fn initial_ensemble_moments() {
    let p = SystemParams::<f64>::symmetric(0.01, 1.0, 0.0);
    let cfg = SimConfig::free(1000.0, 0.01, 1e-3).with_trajectories(100).with_outputs(1);
    let e = simulate(&p, &cfg).unwrap();
    let s0 = &e.snapshots[0].points;
    for mode in 3..=6 {
        let n = intensity(s0, mode).unwrap();
        assert_eq!(n.mean.re, 0.0);
        assert_eq!(n.stderr, 0.0);
    }
    assert!((intensity(s0, 1).unwrap().re() - 1e6).abs() < 1e-6);
    assert_eq!(quadrature_covariance(s0).unwrap().cov, QuadMatrix::identity());
}

#[test]
fn below_threshold_means_relax_to_the_trivial_state() {
    let p = SystemParams::symmetric_at_ratio(0.01, 1.0, 0.5);
    let cfg = SimConfig::cavity(12.0, 0.01).with_trajectories(2000).with_outputs(4).with_seed(21);
    let e = simulate(&p, &cfg).unwrap();
    let pts = &last(&e.snapshots).points;
    let moments: Vec<_> = (1..=6).map(NormalMoment::amplitude).collect();
    let m = estimate_moments(pts, &moments).unwrap();
    let target = p.eps1 / p.gamma[0];
    for k in 0..2 {
        assert!((m[k].mean.re - target).abs() < 0.01 * target, "{:?}", m[k]);
    }
    for est in &m[2..] {
        assert!(est.mean.norm() <= 4.0 * est.stderr + 1e-9, "{est:?}");
    }
}

#[test]
fn above_threshold_with_injection_follows_mean_field() {
    let p = SystemParams::symmetric_at_ratio(0.01, 1.0, 1.49).with_injection(0.5);
    let steady = steady_state(&p).unwrap();
    // the injected signal locks the phase only slowly, so start on the classical state
    let mut cfg = SimConfig::cavity(20.0, 0.005).with_trajectories(400).with_outputs(2).with_seed(5);
    cfg.initial = InitialState::from_amplitudes(steady.alpha);
    let e = simulate(&p, &cfg).unwrap();
    assert_eq!(e.discarded(), 0);
    let pts = &last(&e.snapshots).points;
    let m = estimate_moments(pts, &(1..=6).map(NormalMoment::amplitude).collect::<Vec<_>>()).unwrap();
    for (k, est) in m.iter().enumerate() {
        let a = steady.alpha[k];
        // quantum corrections are O(χ) relative to the classical amplitude
        assert!((est.mean - a).norm() < 0.03 * a.norm() + 4.0 * est.stderr, "mode {}: {:?} vs {a}", k + 1, est);
    }
}

#[test]
fn single_precision_ensembles_run() {
    let p = SystemParams::<f32>::symmetric_at_ratio(0.01, 1.0, 0.5);
    let cfg = SimConfig::<f32>::cavity(1.0, 0.01).with_trajectories(50).with_outputs(2);
    let e = simulate(&p, &cfg).unwrap();
    let n1 = intensity(&e.snapshots.last().unwrap().points, 1).unwrap();
    assert!(n1.re() > 100.0 && n1.re().is_finite());
}
