use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use super::C;
use crate::error::{Error, Result};
use crate::model::{critical_pump, SystemParams, NUM_MODES};
use crate::scalar::Real;

/// Classical mean fields `ᾱ_1..ᾱ_6`; the conjugate sector is `ᾱ_i*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState<T> {
    pub alpha: [C<T>; NUM_MODES],
    /// Whether the trivial below-threshold branch was used.
    pub trivial: bool,
}

impl<T: Real> SteadyState<T> {
    /// `ᾱ_{1,2} = ε_{1,2}/γ_{1,2}`, low modes empty. Exact below threshold
    /// without injection; above threshold it is an unstable fixed point.
    pub fn trivial(params: &SystemParams<T>) -> Self {
        let mut alpha = [C::new(T::zero(), T::zero()); NUM_MODES];
        alpha[0] = C::new(params.eps1 / params.gamma[0], T::zero());
        alpha[1] = C::new(params.eps2 / params.gamma[1], T::zero());
        Self { alpha, trivial: true }
    }

    /// The 12-vector `(ᾱ1, ᾱ1*, ..., ᾱ6, ᾱ6*)`.
    pub fn as_vector(&self) -> [C<T>; 2 * NUM_MODES] {
        std::array::from_fn(|k| {
            let a = self.alpha[k / 2];
            if k % 2 == 0 { a } else { a.conj() }
        })
    }
}

/// Noise-free drift of the classical mean fields with pump, loss and injection.
pub fn mean_field_drift<T: Real>(p: &SystemParams<T>, a: &[C<T>; NUM_MODES]) -> [C<T>; NUM_MODES] {
    let c = |x: T| C::new(x, T::zero());
    let (x1, x2) = (c(p.chi1), c(p.chi2));
    let g = p.gamma.map(c);
    let [a1, a2, a3, a4, a5, a6] = *a;
    [
        c(p.eps1) - x1 * (a4 * a5 + a3 * a6) - g[0] * a1,
        c(p.eps2) - x2 * a5 * a6 - g[1] * a2,
        x1 * a1 * a6.conj() - g[2] * a3 + c(p.eps3_injected),
        x1 * a1 * a5.conj() - g[3] * a4,
        x1 * a1 * a4.conj() + x2 * a2 * a6.conj() - g[4] * a5,
        x1 * a1 * a3.conj() + x2 * a2 * a5.conj() - g[5] * a6,
    ]
}

type Real12<T> = SVector<T, 12>;

fn pack<T: Real>(a: &[C<T>; NUM_MODES]) -> Real12<T> {
    Real12::from_fn(|k, _| if k % 2 == 0 { a[k / 2].re } else { a[k / 2].im })
}

fn unpack<T: Real>(v: &Real12<T>) -> [C<T>; NUM_MODES] {
    std::array::from_fn(|i| C::new(v[2 * i], v[2 * i + 1]))
}

fn residual<T: Real>(p: &SystemParams<T>, a: &[C<T>; NUM_MODES]) -> T {
    mean_field_drift(p, a).iter().map(|z| z.norm_sqr().sqrt()).fold(T::zero(), |m, x| m.max(x))
}

/// Residual target of the numeric fixed point.
const RESIDUAL_TOL: f64 = 1e-10;

/// Classical steady state.
///
/// Below threshold (or exactly at the trivial fixed point when nothing is
/// injected) the analytic solution is returned. Otherwise the mean-field
/// equations are relaxed in time with RK4 and then polished by Newton
/// iteration on the real and imaginary parts.
pub fn steady_state<T: Real>(params: &SystemParams<T>) -> Result<SteadyState<T>> {
    params.validate()?;
    let above = match critical_pump(params) {
        Ok(ec) => params.eps1.max(params.eps2) > ec,
        // Asymmetric: decide from the trivial branch's stability.
        Err(_) => {
            let model = super::assemble(params, &SteadyState::trivial(params));
            !model.stable
        }
    };
    let injected = params.eps3_injected > T::zero();
    if !injected {
        if above {
            return Err(Error::PhaseDiffusionRisk);
        }
        return Ok(SteadyState::trivial(params));
    }
    numeric_fixed_point(params)
}

fn numeric_fixed_point<T: Real>(params: &SystemParams<T>) -> Result<SteadyState<T>> {
    let mut a = SteadyState::trivial(params).alpha;
    a[2] = C::new(params.eps3_injected / params.gamma[2], T::zero());
    let gamma_max = params.gamma.iter().copied().fold(T::zero(), |m, g| m.max(g));
    let dt = T::lit(0.01) / gamma_max;
    let relax_tol = T::lit(1e-6);
    let max_steps = 2_000_000usize;
    let mut converged = false;
    for step in 0..max_steps {
        a = rk4_step(params, &a, dt);
        if step % 100 == 0 {
            let r = residual(params, &a);
            if !r.to_f64_lossy().is_finite() {
                return Err(Error::NoConvergence { residual: f64::INFINITY });
            }
            if r < relax_tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { residual: residual(params, &a).to_f64_lossy() });
    }
    let a = newton_polish(params, a)?;
    Ok(SteadyState { alpha: a, trivial: false })
}

fn rk4_step<T: Real>(p: &SystemParams<T>, a: &[C<T>; NUM_MODES], dt: T) -> [C<T>; NUM_MODES] {
    let add = |x: &[C<T>; NUM_MODES], k: &[C<T>; NUM_MODES], h: T| -> [C<T>; NUM_MODES] {
        std::array::from_fn(|i| x[i] + k[i] * h)
    };
    let half = dt * T::lit(0.5);
    let k1 = mean_field_drift(p, a);
    let k2 = mean_field_drift(p, &add(a, &k1, half));
    let k3 = mean_field_drift(p, &add(a, &k2, half));
    let k4 = mean_field_drift(p, &add(a, &k3, dt));
    let sixth = dt / T::lit(6.0);
    std::array::from_fn(|i| a[i] + (k1[i] + k2[i] * T::lit(2.0) + k3[i] * T::lit(2.0) + k4[i]) * sixth)
}

fn newton_polish<T: Real>(p: &SystemParams<T>, start: [C<T>; NUM_MODES]) -> Result<[C<T>; NUM_MODES]> {
    let f = |v: &Real12<T>| pack(&mean_field_drift(p, &unpack(v)));
    let mut x = pack(&start);
    let tol = T::lit(RESIDUAL_TOL);
    for _ in 0..50 {
        let fx = f(&x);
        if fx.amax() <= tol {
            return Ok(unpack(&x));
        }
        let scale = x.amax().max(T::one());
        let h = T::lit(1e-7) * scale;
        let mut jac = SMatrix::<T, 12, 12>::zeros();
        for j in 0..12 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let col = (f(&xp) - f(&xm)) / (T::lit(2.0) * h);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&(-fx)).ok_or(Error::NoConvergence { residual: fx.amax().to_f64_lossy() })?;
        x += step;
    }
    let r = f(&x).amax();
    if r <= tol * T::lit(10.0) {
        Ok(unpack(&x))
    } else {
        Err(Error::NoConvergence { residual: r.to_f64_lossy() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_threshold_is_analytic() {
        let p = SystemParams::<f64>::symmetric_at_ratio(0.01, 1.0, 0.5);
        let s = steady_state(&p).unwrap();
        assert!(s.trivial);
        assert!((s.alpha[0].re - 30.9017).abs() < 1e-3);
        assert!(s.alpha[2..].iter().all(|z| z.norm() == 0.0));
        assert!(residual(&p, &s.alpha) < 1e-12);
    }

    #[test]
    fn above_threshold_without_injection_is_rejected() {
        let p = SystemParams::<f64>::symmetric_at_ratio(0.01, 1.0, 1.49);
        assert!(matches!(steady_state(&p), Err(Error::PhaseDiffusionRisk)));
    }

    #[test]
    fn above_threshold_with_injection_converges() {
        let p = SystemParams::<f64>::symmetric_at_ratio(0.01, 1.0, 1.49).with_injection(0.5);
        let s = steady_state(&p).unwrap();
        assert!(!s.trivial);
        assert!(residual(&p, &s.alpha) <= 1e-10);
        assert!(s.alpha[2..].iter().all(|z| z.norm() > 1.0), "{:?}", s.alpha);
    }
}
