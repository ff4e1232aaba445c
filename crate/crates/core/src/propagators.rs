//! Closed-form propagation of the leaking two-level system.
//!
//! * rotating-frame amplitudes and populations under resonant driving,
//! * the upper-level tunneling probability for a ground-state start,
//! * undriven propagation with interacting tunneling channels,
//! * the weak-coupling (partial-collapse) limit,
//! * escape probability and its double-exponential form,
//! * the relative deviation `F(t)` caused by the cross-channel rate Γ₀₁.
//!
//! Undriven propagation is computed from the exact exponential of the
//! generator. [`zero_drive_closed_form`] keeps the closed-form coefficients
//! `(Γ − Γ₀ + iω₁₀)/Ω` with `Ω = sqrt(ω₁₀² − 2iω₁₀(Γ − Γ₀) − Γ²)` so the two
//! can be compared; they coincide exactly when `Γ₀₁ = sqrt(Γ₀Γ₁)`.

use num_complex::Complex;
use thiserror::Error;

use crate::hamiltonians::{build_lab_frame, build_rwa, build_zero_drive, ConstantGenerator};
use crate::matrix::Overflow;
use crate::oracle::{integrate_grid, IntegratorConfig, OracleError};
use crate::params::{as_f64, complex_detuning, rabi_squared, ParamError, QubitParams};
use crate::scalar::{half_sinc, principal_sqrt, Real};
use crate::series::TimeSeries;
use crate::state::QubitState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagationError {
    #[error(transparent)]
    Overflow(#[from] Overflow),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("relative deviation undefined at t = {t}: uncoupled upper population is zero")]
    UndefinedDeviation { t: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
}

/// Which propagation route produces the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Rotating-wave closed form.
    Rwa,
    /// Exact undriven propagation including Γ₀₁.
    ZeroDrive,
    /// Independent level decay, valid for ω₁₀ ≫ Γ₁.
    WeakCoupling,
    /// Adaptive integration of the rotating-wave generator.
    Numeric,
    /// Adaptive integration of the full time-dependent lab-frame generator.
    LabFrame,
}

impl Backend {
    pub const ALL: [Backend; 5] = [
        Backend::Rwa,
        Backend::ZeroDrive,
        Backend::WeakCoupling,
        Backend::Numeric,
        Backend::LabFrame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Rwa => "rwa",
            Backend::ZeroDrive => "zero-drive",
            Backend::WeakCoupling => "weak",
            Backend::Numeric => "numeric",
            Backend::LabFrame => "lab-frame",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected rwa|zero-drive|weak|numeric|lab-frame)"))
    }
}

fn check_guard<T: Real>(omega: Complex<T>, t: T) -> Result<(), Overflow> {
    let arg = (omega.im * t * T::lit(0.5)).abs();
    if arg > T::exp_guard() {
        return Err(Overflow {
            arg: as_f64(arg),
            guard: T::EXP_GUARD,
        });
    }
    Ok(())
}

/// `e^{−iλ̃₀t/2}` with `λ̃₀ = ω₀ + ω₁ − iΓ`.
fn mean_phase<T: Real>(p: &QubitParams<T>, t: T) -> Complex<T> {
    let lambda = Complex::new(p.lambda0(), -p.gamma_mean());
    (-Complex::<T>::i() * lambda * (t * T::lit(0.5))).exp()
}

/// Rotating-frame amplitudes
/// `C₁(t) = e^{−iλ̃₀t/2}[(cos(Ωt/2) − i cosθ sin(Ωt/2))C₁(0) − i e^{−iφ} sinθ sin(Ωt/2) C₀(0)]`
/// and its mirror for `C₀`.
///
/// `cosθ sin(Ωt/2)` and `sinθ sin(Ωt/2)` are evaluated as
/// `(Δ − i(Γ − Γ₀))·sin(Ωt/2)/Ω` and `Ω₀·sin(Ωt/2)/Ω`, which stay finite at the
/// exceptional point `Ω = 0`.
pub fn rwa_amplitudes<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
) -> Result<QubitState<T>, PropagationError> {
    let omega = principal_sqrt(rabi_squared(params));
    check_guard(omega, t)?;
    let i = Complex::<T>::i();
    let cos = (omega * (t * T::lit(0.5))).cos();
    let sinc = half_sinc(omega, t);
    let d_sin = complex_detuning(params) * sinc;
    let drive_sin = sinc * params.rabi0;
    let phase = Complex::from_polar(T::one(), params.drive_phase);
    let global = mean_phase(params, t);
    let c1 = (cos - i * d_sin) * initial.c1 - i * phase.conj() * drive_sin * initial.c0;
    let c0 = (cos + i * d_sin) * initial.c0 - i * phase * drive_sin * initial.c1;
    Ok(QubitState::new(global * c1, global * c0))
}

/// `ρ₁₁(t) = e^{−Γt}|(cos(Ωt/2) − i cosθ sin(Ωt/2))C₁(0) − i e^{−iφ} sinθ sin(Ωt/2)C₀(0)|²`
/// and the matching `ρ₀₀(t)`.
pub fn rwa_populations<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
) -> Result<(T, T), PropagationError> {
    Ok(rwa_amplitudes(initial, params, t)?.populations())
}

/// Upper population for a start in |0⟩:
/// `ρ₁₁(t) = e^{−Γt} (Ω₀²/|Ω|²) |sin(Ωt/2)|²`.
pub fn upper_population_special<T: Real>(params: &QubitParams<T>, t: T) -> Result<T, PropagationError> {
    let omega = principal_sqrt(rabi_squared(params));
    check_guard(omega, t)?;
    let decay = (-params.gamma_mean() * t).exp();
    let r2 = params.rabi0 * params.rabi0;
    if omega.norm_sqr() == T::zero() {
        // Jordan limit: |sin(Ωt/2)|²/|Ω|² → t²/4
        return Ok(decay * r2 * t * t * T::lit(0.25));
    }
    let s = (omega * (t * T::lit(0.5))).sin();
    Ok(decay * r2 / omega.norm_sqr() * s.norm_sqr())
}

/// Exact undriven propagation `exp(−iGt)u(0)` of the generator with
/// cross-channel rate `params.gamma01`; `rabi0` is ignored.
pub fn zero_drive_amplitudes<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
) -> Result<QubitState<T>, PropagationError> {
    let g = build_zero_drive(params);
    Ok(g.propagator(t)?.apply(initial))
}

/// Undriven complex Rabi frequency in closed form
/// `Ω = sqrt(ω₁₀² − 2iω₁₀(Γ − Γ₀) − Γ²)`.
pub fn zero_drive_closed_form_frequency<T: Real>(params: &QubitParams<T>) -> Complex<T> {
    let w = params.omega10();
    let g = params.gamma_mean();
    let dg = g - params.gamma0;
    principal_sqrt(Complex::new(w * w - g * g, -T::lit(2.0) * w * dg))
}

/// Exact undriven complex Rabi frequency: the eigenvalue splitting
/// `sqrt((ω₁₀ − i(Γ − Γ₀))² − Γ₀₁²)` of the generator.
pub fn zero_drive_exact_frequency<T: Real>(params: &QubitParams<T>) -> Complex<T> {
    build_zero_drive(params).splitting()
}

/// Closed-form undriven amplitudes
/// `C₁(t) = e^{−iλ̃₀t/2}[(cos(Ωt/2) − ((Γ − Γ₀ + iω₁₀)/Ω) sin(Ωt/2))C₁(0) − (Γ₀₁/Ω) sin(Ωt/2) C₀(0)]`,
/// `C₀(t) = e^{−iλ̃₀t/2}[(cos(Ωt/2) + ((Γ − Γ₀ + iω₁₀)/Ω) sin(Ωt/2))C₀(0) − (Γ₀₁/Ω) sin(Ωt/2) C₁(0)]`,
/// with Ω from [`zero_drive_closed_form_frequency`]. Kept for comparison with
/// [`zero_drive_amplitudes`].
pub fn zero_drive_closed_form<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
) -> Result<QubitState<T>, PropagationError> {
    let omega = zero_drive_closed_form_frequency(params);
    check_guard(omega, t)?;
    let cos = (omega * (t * T::lit(0.5))).cos();
    let sinc = half_sinc(omega, t);
    let kappa = Complex::new(params.gamma_mean() - params.gamma0, params.omega10());
    let cross = sinc * params.gamma01;
    let global = mean_phase(params, t);
    let c1 = (cos - kappa * sinc) * initial.c1 - cross * initial.c0;
    let c0 = (cos + kappa * sinc) * initial.c0 - cross * initial.c1;
    Ok(QubitState::new(global * c1, global * c0))
}

/// `|u(t)⟩ = e^{−iω₀t}e^{−Γ₀t/2}C₀(0)|0⟩ + e^{−iω₁t}e^{−Γ₁t/2}C₁(0)|1⟩`
pub fn weak_coupling_state<T: Real>(initial: &QubitState<T>, params: &QubitParams<T>, t: T) -> QubitState<T> {
    let half = T::lit(0.5);
    let f1 = Complex::new(-params.gamma1 * half * t, -params.omega1 * t).exp();
    let f0 = Complex::new(-params.gamma0 * half * t, -params.omega0 * t).exp();
    QubitState::new(f1 * initial.c1, f0 * initial.c0)
}

/// State at time `t` from the selected backend. Numerical backends
/// integrate from `t = 0` with `cfg`.
pub fn propagate<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
    backend: Backend,
    cfg: &IntegratorConfig<T>,
) -> Result<QubitState<T>, PropagationError> {
    Ok(match backend {
        Backend::Rwa => rwa_amplitudes(initial, params, t)?,
        Backend::ZeroDrive => zero_drive_amplitudes(initial, params, t)?,
        Backend::WeakCoupling => weak_coupling_state(initial, params, t),
        Backend::Numeric => {
            let gen = ConstantGenerator(build_rwa(params));
            integrate_grid(&gen, initial, T::zero(), &[t], cfg)?[0]
        }
        Backend::LabFrame => {
            let gen = build_lab_frame(params);
            integrate_grid(&gen, initial, T::zero(), &[t], cfg)?[0]
        }
    })
}

/// `P_esc(t) = 1 − ρ₁₁(t) − ρ₀₀(t)`, unclipped.
pub fn escape_probability<T: Real>(
    initial: &QubitState<T>,
    params: &QubitParams<T>,
    t: T,
    backend: Backend,
) -> Result<T, PropagationError> {
    let u = propagate(initial, params, t, backend, &IntegratorConfig::default())?;
    Ok(T::one() - u.norm_sqr())
}

/// `P_esc(t) = 1 − ρ₁₁(0)e^{−Γ₁t} − (1 − ρ₁₁(0))e^{−Γ₀t}`
pub fn double_exponential_escape<T: Real>(rho11_0: T, params: &QubitParams<T>, t: T) -> T {
    T::one() - rho11_0 * (-params.gamma1 * t).exp() - (T::one() - rho11_0) * (-params.gamma0 * t).exp()
}

/// `F(t) = (ρ₁₁(Γ₀₁, t) − ρ₁₁(0, t)) / ρ₁₁(0, t)` under zero drive, with the
/// coupled run at `Γ₀₁ = sqrt(Γ₀Γ₁)`.
pub fn deviation_f<T: Real>(initial: &QubitState<T>, params: &QubitParams<T>, t: T) -> Result<T, PropagationError> {
    let coupled = zero_drive_amplitudes(initial, &params.with_physical_cross_rate(), t)?;
    let uncoupled = zero_drive_amplitudes(initial, &params.with_cross_rate(T::zero()), t)?;
    let (p_c, _) = coupled.populations();
    let (p_u, _) = uncoupled.populations();
    if !(p_u > T::zero()) {
        return Err(PropagationError::UndefinedDeviation { t: as_f64(t) });
    }
    Ok((p_c - p_u) / p_u)
}

/// A batch of evaluations on one time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationRequest<T> {
    pub initial: QubitState<T>,
    pub params: QubitParams<T>,
    pub t_grid: Vec<T>,
    pub backend: Backend,
    pub integrator: IntegratorConfig<T>,
}

impl<T: Real> PropagationRequest<T> {
    pub fn new(initial: QubitState<T>, params: QubitParams<T>, t_grid: Vec<T>, backend: Backend) -> Self {
        Self {
            initial,
            params,
            t_grid,
            backend,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PropagationError> {
        self.params.validate()?;
        validate_grid(&self.t_grid)
    }

    /// States on the grid, in grid order.
    pub fn run(&self) -> Result<Vec<QubitState<T>>, PropagationError> {
        self.validate()?;
        let grid = &self.t_grid;
        match self.backend {
            Backend::Numeric => {
                let gen = ConstantGenerator(build_rwa(&self.params));
                Ok(integrate_grid(&gen, &self.initial, T::zero(), grid, &self.integrator)?)
            }
            Backend::LabFrame => {
                let gen = build_lab_frame(&self.params);
                Ok(integrate_grid(&gen, &self.initial, T::zero(), grid, &self.integrator)?)
            }
            b => grid
                .iter()
                .map(|&t| propagate(&self.initial, &self.params, t, b, &self.integrator))
                .collect(),
        }
    }

    pub fn series(&self) -> Result<TimeSeries<T>, PropagationError> {
        let states = self.run()?;
        TimeSeries::from_states(self.t_grid.clone(), &states).map_err(|_| PropagationError::InvalidGrid("times"))
    }
}

pub fn validate_grid<T: Real>(grid: &[T]) -> Result<(), PropagationError> {
    if grid.is_empty() {
        return Err(PropagationError::InvalidGrid("empty"));
    }
    if !(grid[0] >= T::zero()) {
        return Err(PropagationError::InvalidGrid("first time must be >= 0"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PropagationError::InvalidGrid("times must be strictly increasing"));
    }
    Ok(())
}

/// `n` equally spaced points from `start` to `stop` inclusive.
pub fn linspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::from_usize(n - 1).unwrap();
            (0..n)
                .map(|k| if k == n - 1 { stop } else { start + step * T::from_usize(k).unwrap() })
                .collect()
        }
    }
}
