//! Physical parameters of the qubit–continuum system and the derived
//! rotating-frame quantities.
//!
//! All fields are stored in canonical units (rad/ns, ns⁻¹, rad). Level
//! energies only enter through `ω₁₀ = ω₁ − ω₀` and a global phase, so the
//! builder defaults to `ω₀ = 0`, `ω₁ = ω₁₀`.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{principal_sqrt, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("cross rate gamma01 = {gamma01} exceeds sqrt(gamma0 * gamma1) = {bound}")]
    CrossRateTooLarge { gamma01: f64, bound: f64 },
    #[error("complex Rabi frequency is exactly zero: generator is not diagonalizable (exceptional point)")]
    ExceptionalPoint,
    #[error("missing parameter `{0}`")]
    Missing(&'static str),
    #[error("conflicting parameters: {0}")]
    Conflict(String),
}

/// Physical parameters of the driven, leaking two-level system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitParams<T> {
    /// Energy of |0⟩, rad/ns.
    pub omega0: T,
    /// Energy of |1⟩, rad/ns.
    pub omega1: T,
    /// Tunneling rate out of |0⟩, ns⁻¹.
    pub gamma0: T,
    /// Tunneling rate out of |1⟩, ns⁻¹.
    pub gamma1: T,
    /// Cross-channel rate Γ₀₁ = Γ₁₀, ns⁻¹. Physical value is `sqrt(Γ₀Γ₁)`;
    /// zero reproduces the rotating-frame neglect of channel interaction.
    pub gamma01: T,
    /// On-resonance Rabi amplitude Ω₀, rad/ns.
    pub rabi0: T,
    /// Microwave drive frequency ω, rad/ns.
    pub drive_freq: T,
    /// Drive phase φ, rad.
    pub drive_phase: T,
}

impl<T: Real> QubitParams<T> {
    pub fn builder() -> QubitParamsBuilder<T> {
        QubitParamsBuilder::default()
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("gamma01", self.gamma01),
            ("rabi0", self.rabi0),
            ("drive_freq", self.drive_freq),
            ("drive_phase", self.drive_phase),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NonFinite {
                    name,
                    value: as_f64(value),
                });
            }
        }
        for (name, value) in [
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("rabi0", self.rabi0),
            ("drive_freq", self.drive_freq),
        ] {
            if value < T::zero() {
                return Err(ParamError::Negative {
                    name,
                    value: as_f64(value),
                });
            }
        }
        // a hair of slack so that gamma01 = sqrt(g0 g1) always passes
        let bound2 = self.gamma0 * self.gamma1;
        if self.gamma01 * self.gamma01 > bound2 * (T::one() + T::lit(8.0) * T::epsilon()) {
            return Err(ParamError::CrossRateTooLarge {
                gamma01: as_f64(self.gamma01),
                bound: as_f64(bound2.sqrt()),
            });
        }
        Ok(())
    }

    /// ω₁₀ = ω₁ − ω₀
    pub fn omega10(&self) -> T {
        self.omega1 - self.omega0
    }

    /// λ₀ = ω₀ + ω₁
    pub fn lambda0(&self) -> T {
        self.omega0 + self.omega1
    }

    /// Δ = ω₁₀ − ω
    pub fn detuning(&self) -> T {
        self.omega10() - self.drive_freq
    }

    /// Γ = (Γ₀ + Γ₁)/2
    pub fn gamma_mean(&self) -> T {
        (self.gamma0 + self.gamma1) * T::lit(0.5)
    }

    /// `sqrt(Γ₀Γ₁)`, the cross rate for real constant tunneling amplitudes.
    pub fn physical_cross_rate(&self) -> T {
        (self.gamma0 * self.gamma1).sqrt()
    }

    pub fn with_cross_rate(mut self, gamma01: T) -> Self {
        self.gamma01 = gamma01;
        self
    }

    pub fn with_physical_cross_rate(self) -> Self {
        let g = self.physical_cross_rate();
        self.with_cross_rate(g)
    }

    pub fn with_rabi0(mut self, rabi0: T) -> Self {
        self.rabi0 = rabi0;
        self
    }

    /// Keeps ω₁₀ and moves the drive so that `ω₁₀ − ω = detuning`.
    pub fn with_detuning(mut self, detuning: T) -> Self {
        self.drive_freq = self.omega10() - detuning;
        self
    }

    /// Sets Γ₁ so that the mean rate is `gamma` while keeping Γ₀ (and
    /// rescaling Γ₀₁ if it was at its physical value).
    pub fn with_gamma_mean(mut self, gamma: T) -> Self {
        let was_physical = self.gamma01 == self.physical_cross_rate();
        self.gamma1 = T::lit(2.0) * gamma - self.gamma0;
        if was_physical {
            self.gamma01 = self.physical_cross_rate();
        }
        self
    }

    /// Casts every field to another scalar type.
    pub fn cast<U: Real>(&self) -> QubitParams<U> {
        let f = |x: T| U::lit(as_f64(x));
        QubitParams {
            omega0: f(self.omega0),
            omega1: f(self.omega1),
            gamma0: f(self.gamma0),
            gamma1: f(self.gamma1),
            gamma01: f(self.gamma01),
            rabi0: f(self.rabi0),
            drive_freq: f(self.drive_freq),
            drive_phase: f(self.drive_phase),
        }
    }
}

pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Assembles [`QubitParams`] from whichever equivalent quantities are at hand
/// (e.g. ω₁₀ and Δ instead of ω₁ and ω; Γ instead of Γ₁).
#[derive(Clone, Debug, Default)]
pub struct QubitParamsBuilder<T> {
    omega0: Option<T>,
    omega1: Option<T>,
    omega10: Option<T>,
    gamma0: Option<T>,
    gamma1: Option<T>,
    gamma_mean: Option<T>,
    gamma01: Option<T>,
    rabi0: Option<T>,
    drive_freq: Option<T>,
    detuning: Option<T>,
    drive_phase: Option<T>,
}

macro_rules! setter {
    ($($name:ident),*) => {$(
        pub fn $name(mut self, v: T) -> Self {
            self.$name = Some(v);
            self
        }
    )*};
}

impl<T: Real> QubitParamsBuilder<T> {
    setter!(
        omega0, omega1, omega10, gamma0, gamma1, gamma_mean, gamma01, rabi0, drive_freq,
        detuning, drive_phase
    );

    pub fn build(self) -> Result<QubitParams<T>, ParamError> {
        let omega0 = self.omega0.unwrap_or_else(T::zero);
        let omega1 = match (self.omega1, self.omega10) {
            (Some(_), Some(_)) => {
                return Err(ParamError::Conflict("give omega1 or omega10, not both".into()))
            }
            (Some(w1), None) => w1,
            (None, Some(w10)) => omega0 + w10,
            (None, None) => return Err(ParamError::Missing("omega10")),
        };
        let omega10 = omega1 - omega0;
        let drive_freq = match (self.drive_freq, self.detuning) {
            (Some(_), Some(_)) => {
                return Err(ParamError::Conflict(
                    "give drive_freq or detuning, not both".into(),
                ))
            }
            (Some(w), None) => w,
            (None, Some(d)) => omega10 - d,
            (None, None) => omega10,
        };
        let gamma0 = self.gamma0.unwrap_or_else(T::zero);
        let gamma1 = match (self.gamma1, self.gamma_mean) {
            (Some(_), Some(_)) => {
                return Err(ParamError::Conflict("give gamma1 or gamma, not both".into()))
            }
            (Some(g1), None) => g1,
            (None, Some(g)) => T::lit(2.0) * g - gamma0,
            (None, None) => return Err(ParamError::Missing("gamma1")),
        };
        let gamma01 = self.gamma01.unwrap_or_else(|| (gamma0 * gamma1).sqrt());
        let params = QubitParams {
            omega0,
            omega1,
            gamma0,
            gamma1,
            gamma01,
            rabi0: self.rabi0.unwrap_or_else(T::zero),
            drive_freq,
            drive_phase: self.drive_phase.unwrap_or_else(T::zero),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Rotating-frame quantities derived from [`QubitParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaParams<T> {
    pub lambda0: T,
    pub omega10: T,
    pub detuning: T,
    pub gamma_mean: T,
    /// Complex Rabi frequency Ω = sqrt(Ω₀² + (Δ − i(Γ − Γ₀))²), `Re Ω >= 0`.
    pub omega_c: Complex<T>,
    pub cos_theta: Complex<T>,
    pub sin_theta: Complex<T>,
}

/// `Δ − i(Γ − Γ₀)`, the complex detuning of the rotating-frame generator.
pub(crate) fn complex_detuning<T: Real>(p: &QubitParams<T>) -> Complex<T> {
    Complex::new(p.detuning(), -(p.gamma_mean() - p.gamma0))
}

/// Ω² = Ω₀² + (Δ − i(Γ − Γ₀))²
pub fn rabi_squared<T: Real>(p: &QubitParams<T>) -> Complex<T> {
    let d = complex_detuning(p);
    d * d + p.rabi0 * p.rabi0
}

pub fn derive_rwa<T: Real>(params: &QubitParams<T>) -> Result<RwaParams<T>, ParamError> {
    params.validate()?;
    let omega_c = principal_sqrt(rabi_squared(params));
    if omega_c.re == T::zero() && omega_c.im == T::zero() {
        return Err(ParamError::ExceptionalPoint);
    }
    Ok(RwaParams {
        lambda0: params.lambda0(),
        omega10: params.omega10(),
        detuning: params.detuning(),
        gamma_mean: params.gamma_mean(),
        omega_c,
        cos_theta: complex_detuning(params) / omega_c,
        sin_theta: Complex::from(params.rabi0) / omega_c,
    })
}
