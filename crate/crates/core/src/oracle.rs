//! Independent numerical propagation of `i du/dt = G(t) u`.
//!
//! The adaptive integrator is a Dormand–Prince 5(4) embedded pair with an
//! elementary step-size controller (safety 0.9, growth clamped to [0.2, 5]).
//! It knows nothing about the closed forms in [`crate::propagators`], which is
//! what makes it usable as a check on them. The state is advanced in a frame
//! rotating at the mean level frequency `Re tr G(t₀)/2`, which is restored as
//! an exact scalar phase at the end of each interval.

use num_complex::Complex;
use thiserror::Error;

use crate::hamiltonians::TimeDependentGenerator;
use crate::matrix::{Generator2, Overflow};
use crate::params::as_f64;
use crate::scalar::Real;
use crate::state::QubitState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepsExhausted { max_steps: usize, t: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid interval: t1 = {t1} < t0 = {t0}")]
    BackwardInterval { t0: f64, t1: f64 },
    #[error("invalid integrator configuration: {0}")]
    Config(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the step, ns. `None` leaves it unbounded.
    pub max_step: Option<T>,
    /// First trial step, ns. `None` selects one from the generator scale.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            max_step: None,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(mut self, rel_tol: T, abs_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(OracleError::Config("tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(OracleError::Config("max_steps must be positive"));
        }
        if matches!(self.max_step, Some(h) if !(h > T::zero())) {
            return Err(OracleError::Config("max_step must be positive"));
        }
        if matches!(self.initial_step, Some(h) if !(h > T::zero())) {
            return Err(OracleError::Config("initial_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Vec2<T> = [Complex<T>; 2];

// `shift` is removed from the diagonal; the caller restores it as a phase.
fn rhs<T: Real, G: TimeDependentGenerator<T> + ?Sized>(gen: &G, shift: T, t: T, u: &Vec2<T>) -> Vec2<T> {
    let g = gen.eval(t);
    let m = &g.m;
    let mi = -Complex::<T>::i();
    [
        mi * ((m[0][0] - shift) * u[0] + m[0][1] * u[1]),
        mi * (m[1][0] * u[0] + (m[1][1] - shift) * u[1]),
    ]
}

fn axpy<T: Real>(u: &Vec2<T>, h: T, coeffs: &[f64], ks: &[Vec2<T>]) -> Vec2<T> {
    let mut out = *u;
    for (a, k) in coeffs.iter().zip(ks) {
        if *a != 0.0 {
            let s = h * T::lit(*a);
            out[0] += k[0] * s;
            out[1] += k[1] * s;
        }
    }
    out
}

fn error_norm<T: Real>(err: &Vec2<T>, u: &Vec2<T>, v: &Vec2<T>, cfg: &IntegratorConfig<T>) -> T {
    let mut acc = T::zero();
    for j in 0..2 {
        let scale = cfg.abs_tol + cfg.rel_tol * u[j].norm().max(v[j].norm());
        let r = err[j].norm() / scale;
        acc += r * r;
    }
    (acc / T::lit(2.0)).sqrt()
}

/// Integrates from `t0` to `t1` and returns the final state.
pub fn integrate<T: Real, G: TimeDependentGenerator<T> + ?Sized>(
    gen: &G,
    initial: &QubitState<T>,
    t0: T,
    t1: T,
    cfg: &IntegratorConfig<T>,
) -> Result<QubitState<T>, OracleError> {
    integrate_with_stats(gen, initial, t0, t1, cfg).map(|(u, _)| u)
}

pub fn integrate_with_stats<T: Real, G: TimeDependentGenerator<T> + ?Sized>(
    gen: &G,
    initial: &QubitState<T>,
    t0: T,
    t1: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(QubitState<T>, IntegrationStats), OracleError> {
    cfg.validate()?;
    if t1 < t0 {
        return Err(OracleError::BackwardInterval {
            t0: as_f64(t0),
            t1: as_f64(t1),
        });
    }
    let mut stats = IntegrationStats::default();
    let mut u: Vec2<T> = [initial.c1, initial.c0];
    if t1 == t0 {
        return Ok((*initial, stats));
    }
    let span = t1 - t0;
    let max_step = cfg.max_step.unwrap_or(span).min(span);
    let mut t = t0;
    // integrate in the frame rotating at the mean level frequency at t0
    let shift = gen.eval(t0).trace().re * T::lit(0.5);
    let mut k0 = rhs(gen, shift, t, &u);
    stats.evaluations += 1;
    let mut h = match cfg.initial_step {
        Some(h) => h,
        None => initial_step(gen, shift, t0, &u, &k0, cfg),
    }
    .min(max_step);

    let safety = T::lit(0.9);
    let (fac_min, fac_max) = (T::lit(0.2), T::lit(5.0));
    let expo = T::lit(-0.2);
    let mut last_rejected = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(OracleError::StepsExhausted {
                max_steps: cfg.max_steps,
                t: as_f64(t),
            });
        }
        let remaining = t1 - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= T::lit(16.0) * T::epsilon() * t.abs().max(span) {
            return Err(OracleError::StepUnderflow {
                t: as_f64(t),
                h: as_f64(h),
            });
        }

        let mut ks: [Vec2<T>; 7] = [k0; 7];
        for s in 1..7 {
            let us = axpy(&u, h, &A[s][..s], &ks[..s]);
            ks[s] = rhs(gen, shift, t + h * T::lit(C[s]), &us);
        }
        stats.evaluations += 6;
        // the last stage is evaluated at the fifth-order solution (FSAL)
        let u_new = axpy(&u, h, &A[6][..6], &ks[..6]);
        let err = axpy(&[Complex::default(); 2], h, &E, &ks);
        let en = error_norm(&err, &u, &u_new, cfg);
        if !en.is_finite() {
            stats.rejected += 1;
            h = h * fac_min;
            last_rejected = true;
            continue;
        }

        if en <= T::one() {
            t = if last { t1 } else { t + h };
            u = u_new;
            k0 = ks[6];
            stats.accepted += 1;
            if !(u[0].re.is_finite() && u[0].im.is_finite() && u[1].re.is_finite() && u[1].im.is_finite()) {
                return Err(OracleError::NonFinite { t: as_f64(t) });
            }
            let mut fac = if en == T::zero() {
                fac_max
            } else {
                (safety * en.powf(expo)).max(fac_min).min(fac_max)
            };
            if last_rejected {
                fac = fac.min(T::one());
            }
            h = (h * fac).min(max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (safety * en.powf(expo)).max(fac_min).min(T::one());
            h = h * fac;
            last_rejected = true;
        }
    }
    let phase = Complex::from_polar(T::one(), -shift * span);
    Ok((QubitState::new(phase * u[0], phase * u[1]), stats))
}

// Hairer–Nørsett–Wanner starting step heuristic for a fifth-order method.
fn initial_step<T: Real, G: TimeDependentGenerator<T> + ?Sized>(
    gen: &G,
    shift: T,
    t0: T,
    u0: &Vec2<T>,
    f0: &Vec2<T>,
    cfg: &IntegratorConfig<T>,
) -> T {
    let scale = |u: &Vec2<T>, j: usize| cfg.abs_tol + cfg.rel_tol * u[j].norm();
    let rms = |v: &Vec2<T>| {
        let mut acc = T::zero();
        for j in 0..2 {
            let r = v[j].norm() / scale(u0, j);
            acc += r * r;
        }
        (acc / T::lit(2.0)).sqrt()
    };
    let d0 = rms(u0);
    let d1 = rms(f0);
    let tiny = T::lit(1e-5);
    let h0 = if d0 < tiny || d1 < tiny {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let u1 = axpy(u0, h0, &[1.0], &[*f0]);
    let f1 = rhs(gen, shift, t0 + h0, &u1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1]];
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1)
}

/// Integrates through each time of `times` (ascending, all `>= t0`),
/// continuing from the previous grid point.
pub fn integrate_grid<T: Real, G: TimeDependentGenerator<T> + ?Sized>(
    gen: &G,
    initial: &QubitState<T>,
    t0: T,
    times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<QubitState<T>>, OracleError> {
    let mut out = Vec::with_capacity(times.len());
    let mut state = *initial;
    let mut t = t0;
    for &tk in times {
        state = integrate(gen, &state, t, tk, cfg)?;
        t = tk;
        out.push(state);
    }
    Ok(out)
}

/// Exact `exp(−iGt)` of a constant generator.
pub fn expm_const<T: Real>(gen: &Generator2<T>, t: T) -> Result<Generator2<T>, Overflow> {
    gen.propagator(t)
}
