use nalgebra::ComplexField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{joint_variances, MomentEstimate};
use super::{drift_cavity, drift_free, noise_increment, PhaseSpacePoint, C};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::scalar::Real;

/// Coherent amplitudes at `t = 0`. The low modes normally start in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct InitialState<T> {
    pub alpha1: C<T>,
    pub alpha2: C<T>,
    /// Modes 3 to 6.
    pub low: [C<T>; 4],
}

impl<T: Real> InitialState<T> {
    pub fn vacuum() -> Self {
        Self::coherent(T::zero(), T::zero())
    }

    /// Real pump amplitudes.
    pub fn coherent(alpha1: T, alpha2: T) -> Self {
        let z = C::new(T::zero(), T::zero());
        Self { alpha1: C::new(alpha1, T::zero()), alpha2: C::new(alpha2, T::zero()), low: [z; 4] }
    }

    /// Coherent state at the given amplitudes of all six modes.
    pub fn from_amplitudes(alpha: [C<T>; 6]) -> Self {
        Self { alpha1: alpha[0], alpha2: alpha[1], low: [alpha[2], alpha[3], alpha[4], alpha[5]] }
    }

    pub fn point(&self) -> PhaseSpacePoint<T> {
        let mut p = PhaseSpacePoint::coherent_pumps(self.alpha1, self.alpha2);
        for (k, a) in self.low.iter().enumerate() {
            p.alpha[k + 2] = *a;
            p.alpha_plus[k + 2] = a.conj();
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SimConfig<T> {
    /// Include pumping, losses and injection. Without it only the
    /// downconversion terms act.
    pub cavity: bool,
    pub n_traj: usize,
    pub dt: T,
    pub t_final: T,
    /// Number of equal output intervals; snapshots are taken at
    /// `n_outputs + 1` times including `t = 0`.
    pub n_outputs: usize,
    pub seed: u64,
    pub initial: InitialState<T>,
    /// Hold the pump amplitudes at their initial values.
    pub pin_pumps: bool,
    /// A trajectory is discarded once any amplitude exceeds this modulus.
    pub divergence_bound: T,
}

impl<T: Real> SimConfig<T> {
    /// Free evolution from coherent pumps of amplitude `alpha0`.
    pub fn free(alpha0: T, t_final: T, dt: T) -> Self {
        Self {
            cavity: false,
            n_traj: 1000,
            dt,
            t_final,
            n_outputs: 50,
            seed: 1,
            initial: InitialState::coherent(alpha0, alpha0),
            pin_pumps: false,
            divergence_bound: T::lit(1e8),
        }
    }

    /// Cavity evolution from vacuum.
    pub fn cavity(t_final: T, dt: T) -> Self {
        Self { cavity: true, initial: InitialState::vacuum(), ..Self::free(T::zero(), t_final, dt) }
    }

    pub fn with_trajectories(mut self, n: usize) -> Self {
        self.n_traj = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_outputs(mut self, n: usize) -> Self {
        self.n_outputs = n;
        self
    }

    pub fn pinned(mut self) -> Self {
        self.pin_pumps = true;
        self
    }

    /// `(total steps, steps per output interval)`.
    pub fn step_counts(&self) -> Result<(usize, usize)> {
        if !(self.dt > T::zero()) || !(self.t_final > T::zero()) {
            return Err(Error::InvalidParams("dt and t_final must be positive".into()));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidParams("at least one trajectory is required".into()));
        }
        if self.n_outputs == 0 {
            return Err(Error::InvalidParams("at least one output interval is required".into()));
        }
        let per_output = (self.t_final / self.dt / T::from_count(self.n_outputs)).to_f64_lossy().round();
        if !(per_output >= 1.0) || per_output > 1e12 {
            return Err(Error::InvalidParams("dt too large for the requested output spacing".into()));
        }
        let per_output = per_output as usize;
        Ok((per_output * self.n_outputs, per_output))
    }
}

/// Surviving trajectories at one output time.
#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub t: T,
    pub step: usize,
    pub points: Vec<PhaseSpacePoint<T>>,
    /// Trajectories discarded so far.
    pub discarded: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub n_traj: usize,
}

impl<T: Real> TrajectoryEnsemble<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn discarded(&self) -> usize {
        self.snapshots.last().map_or(0, |s| s.discarded)
    }
}

/// Lock-step Euler-Maruyama integration of an ensemble.
///
/// Every trajectory owns a ChaCha8 stream derived from the seed and its
/// index, so results do not depend on thread scheduling.
#[derive(Debug, Clone)]
pub struct Simulation<T: Real> {
    pub(crate) params: SystemParams<T>,
    pub(crate) config: SimConfig<T>,
    pub(crate) states: Vec<PhaseSpacePoint<T>>,
    pub(crate) rngs: Vec<ChaCha8Rng>,
    pub(crate) alive: Vec<bool>,
    pub(crate) step: usize,
    total_steps: usize,
    per_output: usize,
}

pub(crate) fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

impl<T: Real> Simulation<T> {
    pub fn new(params: SystemParams<T>, config: SimConfig<T>) -> Result<Self> {
        params.validate()?;
        let (total_steps, per_output) = config.step_counts()?;
        let start = config.initial.point();
        Ok(Self {
            params,
            config,
            states: vec![start; config.n_traj],
            rngs: (0..config.n_traj).map(|k| trajectory_rng(config.seed, k)).collect(),
            alive: vec![true; config.n_traj],
            step: 0,
            total_steps,
            per_output,
        })
    }

    pub(crate) fn restore(
        params: SystemParams<T>,
        config: SimConfig<T>,
        step: usize,
        states: Vec<PhaseSpacePoint<T>>,
        rngs: Vec<ChaCha8Rng>,
        alive: Vec<bool>,
    ) -> Result<Self> {
        let mut sim = Self::new(params, config)?;
        if step > sim.total_steps || states.len() != config.n_traj {
            return Err(Error::Checkpoint("checkpoint does not match the configuration".into()));
        }
        sim.step = step;
        sim.states = states;
        sim.rngs = rngs;
        sim.alive = alive;
        Ok(sim)
    }

    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.config
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn steps_per_output(&self) -> usize {
        self.per_output
    }

    pub fn time(&self) -> T {
        self.config.dt * T::from_count(self.step)
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.total_steps
    }

    pub fn discarded(&self) -> usize {
        self.alive.iter().filter(|a| !**a).count()
    }

    /// All trajectory states, including discarded ones, in index order.
    pub fn states(&self) -> &[PhaseSpacePoint<T>] {
        &self.states
    }

    pub fn alive(&self) -> &[bool] {
        &self.alive
    }

    pub fn snapshot(&self) -> Snapshot<T> {
        Snapshot {
            t: self.time(),
            step: self.step,
            points: self
                .states
                .iter()
                .zip(&self.alive)
                .filter_map(|(s, a)| a.then_some(*s))
                .collect(),
            discarded: self.discarded(),
        }
    }

    /// Advance by up to `n` steps, stopping at the final time.
    pub fn run_steps(&mut self, n: usize) {
        let n = n.min(self.total_steps - self.step);
        if n == 0 {
            return;
        }
        let params = self.params;
        let cfg = self.config;
        self.states
            .par_iter_mut()
            .zip(self.rngs.par_iter_mut())
            .zip(self.alive.par_iter_mut())
            .for_each(|((x, rng), alive)| {
                if *alive {
                    *alive = integrate(&params, &cfg, x, rng, n);
                }
            });
        self.step += n;
    }

    /// Run to the final time, handing each output snapshot to `observe`.
    ///
    /// The current time is reported first when it falls on the output grid.
    pub fn run<F: FnMut(&Snapshot<T>)>(&mut self, mut observe: F) {
        loop {
            if self.step.is_multiple_of(self.per_output) {
                observe(&self.snapshot());
            }
            if self.is_finished() {
                break;
            }
            let next = (self.step / self.per_output + 1) * self.per_output;
            self.run_steps(next - self.step);
        }
    }
}

/// Integrate one trajectory for `n` steps. Returns `false` if it diverged.
fn integrate<T: Real, R: Rng>(
    p: &SystemParams<T>,
    cfg: &SimConfig<T>,
    x: &mut PhaseSpacePoint<T>,
    rng: &mut R,
    n: usize,
) -> bool {
    let dt = cfg.dt;
    let sqdt = ComplexField::sqrt(dt);
    let bound2 = cfg.divergence_bound * cfg.divergence_bound;
    let mut eta = [T::zero(); 12];
    for _ in 0..n {
        for e in eta.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *e = T::lit(z) * sqdt;
        }
        let mut d = if cfg.cavity { drift_cavity(p, x) } else { drift_free(p.chi1, p.chi2, x) };
        if cfg.pin_pumps {
            for k in 0..2 {
                d.alpha[k] = C::new(T::zero(), T::zero());
                d.alpha_plus[k] = C::new(T::zero(), T::zero());
            }
        }
        let noise = noise_increment(p.chi1, p.chi2, x, &eta);
        x.axpy(dt, &d);
        x.axpy(T::one(), &noise);
        let big = x
            .alpha
            .iter()
            .chain(x.alpha_plus.iter())
            .any(|z| !(z.norm_sqr() <= bound2));
        if big {
            return false;
        }
    }
    true
}

/// Run a simulation and keep every snapshot.
pub fn simulate<T: Real>(params: &SystemParams<T>, config: &SimConfig<T>) -> Result<TrajectoryEnsemble<T>> {
    let mut sim = Simulation::new(*params, *config)?;
    let mut snapshots = Vec::with_capacity(config.n_outputs + 1);
    sim.run(|s| snapshots.push(s.clone()));
    Ok(TrajectoryEnsemble { snapshots, n_traj: config.n_traj })
}

/// Estimated `V(O_1)..V(O_4)` at every output time, without storing trajectories.
pub fn joint_operator_variances_cavity<T: Real>(
    params: &SystemParams<T>,
    config: &SimConfig<T>,
) -> Result<Vec<(T, [MomentEstimate<T>; 4])>> {
    let mut sim = Simulation::new(*params, *config)?;
    let mut out = Vec::with_capacity(config.n_outputs + 1);
    let mut failure = None;
    sim.run(|s| match joint_variances(&s.points) {
        Ok(v) => out.push((s.t, v)),
        Err(e) => {
            failure.get_or_insert(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (SystemParams<f64>, SimConfig<f64>) {
        let p = SystemParams::symmetric_at_ratio(0.01, 1.0, 0.5);
        let c = SimConfig::cavity(1.0, 0.01).with_trajectories(64).with_outputs(4).with_seed(9);
        (p, c)
    }

    #[test]
    fn step_counts_round_to_the_output_grid() {
        let (_, c) = small();
        assert_eq!(c.step_counts().unwrap(), (100, 25));
        let bad = SimConfig { dt: 0.0, ..c };
        assert!(bad.step_counts().unwrap_err().is_validation());
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let (p, c) = small();
        let a = simulate(&p, &c).unwrap();
        let b = simulate(&p, &c).unwrap();
        let last = |e: &TrajectoryEnsemble<f64>| e.snapshots.last().unwrap().points.clone();
        assert_eq!(last(&a), last(&b));
        let other = simulate(&p, &c.with_seed(10)).unwrap();
        assert_ne!(last(&a), last(&other));
    }

    #[test]
    fn trajectory_streams_are_independent_of_ensemble_size() {
        let (p, c) = small();
        let a = simulate(&p, &c).unwrap();
        let b = simulate(&p, &c.with_trajectories(8)).unwrap();
        assert_eq!(a.snapshots[4].points[..8], b.snapshots[4].points[..]);
    }

    #[test]
    fn snapshots_cover_the_output_grid() {
        let (p, c) = small();
        let e = simulate(&p, &c).unwrap();
        let t = e.times();
        assert_eq!(t.len(), 5);
        assert!((t[4] - 1.0).abs() < 1e-12 && t[0] == 0.0);
        assert!(e.snapshots.iter().all(|s| s.points.len() == 64));
    }

    #[test]
    fn divergent_trajectories_are_counted() {
        let (p, mut c) = small();
        c.divergence_bound = 1e-3;
        let e = simulate(&p, &c).unwrap();
        assert_eq!(e.discarded(), 64);
        assert!(e.snapshots.last().unwrap().points.is_empty());
    }

    #[test]
    fn pinned_pumps_stay_fixed() {
        let p = SystemParams::symmetric(0.01, 1.0, 0.0);
        let c = SimConfig::free(1000.0, 0.05, 1e-3).with_trajectories(4).pinned();
        let e = simulate(&p, &c).unwrap();
        for x in &e.snapshots.last().unwrap().points {
            assert_eq!(x.alpha[0], C::new(1000.0, 0.0));
            assert_eq!(x.alpha_plus[1], C::new(1000.0, 0.0));
            assert!(x.number(3).norm() > 0.0);
        }
    }
}
