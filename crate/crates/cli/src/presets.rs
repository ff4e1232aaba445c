//! Built-in scenarios for the three standard regimes: the Bloch-vector
//! spiral, damped Rabi oscillations and the channel-interaction deviation.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};

use phase_qubit::units::{to_canonical, Unit};
use phase_qubit::{Backend, Bloch, Params, State};

use crate::error::CliError;
use crate::scenario::{Grid, Scenario};

pub const CHECK_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub scenario: Scenario,
}

/// A quoted value compared against the preset after unit conversion.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: &'static str,
    pub quoted: f64,
    pub actual: f64,
}

impl Check {
    pub fn passes(&self) -> bool {
        (self.actual - self.quoted).abs() <= CHECK_TOL * self.quoted.abs().max(self.actual.abs())
            || self.actual == self.quoted
    }
}

fn per_two_pi(omega: f64, unit: Unit) -> f64 {
    phase_qubit::convert(omega, Unit::RadPerNs, unit).unwrap()
}

fn fig2() -> Preset {
    // n(0) = (0, 1, -1)/sqrt(2) with Γ₀ frozen out
    let params = Params::builder()
        .omega10(to_canonical(5.0, Unit::GHz))
        .rabi0(to_canonical(80.0, Unit::MHz))
        .detuning(0.0)
        .gamma0(0.0)
        .gamma_mean(0.035)
        .drive_phase(-FRAC_PI_2)
        .build()
        .expect("preset parameters are valid");
    let initial = State::from_bloch(&Bloch::new(1.0, 0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2));
    Preset {
        name: "fig2-bloch",
        description: "resonant drive at 80 MHz, Γ = 0.035 ns⁻¹: decaying Bloch-vector spiral",
        scenario: Scenario {
            name: "fig2-bloch".into(),
            params,
            initial,
            grid: Grid::new(0.0, 100.0, 1001).unwrap(),
            mode: Backend::Rwa,
        },
    }
}

fn fig3() -> Preset {
    let params = Params::builder()
        .omega10(to_canonical(5.0, Unit::GHz))
        .rabi0(to_canonical(0.47, Unit::MHz))
        .detuning(to_canonical(1.34, Unit::MHz))
        .gamma_mean(to_canonical(0.204, Unit::PerUs))
        .gamma0(to_canonical(0.4e-3, Unit::PerUs))
        .build()
        .expect("preset parameters are valid");
    Preset {
        name: "fig3-rabi",
        description: "detuned Rabi oscillations over 10 µs with Γ = 0.204 µs⁻¹",
        scenario: Scenario {
            name: "fig3-rabi".into(),
            params,
            initial: State::from_real(0.291, 0.956).normalized(),
            grid: Grid::new(0.0, 10_000.0, 2001).unwrap(),
            mode: Backend::Rwa,
        },
    }
}

fn fig4() -> Preset {
    let gamma1 = 0.1;
    let params = Params::builder()
        .omega10(to_canonical(5.0, Unit::GHz))
        .gamma1(gamma1)
        .gamma0(gamma1 / 150.0)
        .rabi0(0.0)
        .build()
        .expect("preset parameters are valid");
    Preset {
        name: "fig4-deviation",
        description: "undriven fast readout, Γ₁ = 0.1 ns⁻¹, Γ₁/Γ₀ = 150: deviation F(t) on [0, 3] ns",
        scenario: Scenario {
            name: "fig4-deviation".into(),
            params,
            initial: State::from_real(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            grid: Grid::new(0.0, 3.0, 301).unwrap(),
            mode: Backend::ZeroDrive,
        },
    }
}

impl Preset {
    /// Quoted regime values against the constructed scenario.
    pub fn checks(&self) -> Vec<Check> {
        let p = &self.scenario.params;
        let b = self.scenario.initial.bloch();
        let c = |label, quoted, actual| Check { label, quoted, actual };
        match self.name {
            "fig2-bloch" => vec![
                c("gamma [ns^-1]", 0.035, p.gamma_mean()),
                c("rabi0/2pi [MHz]", 80.0, per_two_pi(p.rabi0, Unit::MHz)),
                c("detuning [rad/ns]", 0.0, p.detuning()),
                c("drive_phase [rad]", -FRAC_PI_2, p.drive_phase),
                c("n0(0)", 1.0, b.n0),
                c("nx(0)", 0.0, b.nx),
                c("ny(0)", FRAC_1_SQRT_2, b.ny),
                c("nz(0)", -FRAC_1_SQRT_2, b.nz),
            ],
            "fig3-rabi" => vec![
                c("rabi0/2pi [MHz]", 0.47, per_two_pi(p.rabi0, Unit::MHz)),
                c("detuning/2pi [MHz]", 1.34, per_two_pi(p.detuning(), Unit::MHz)),
                c("gamma [us^-1]", 0.204, p.gamma_mean() * 1e3),
                c("gamma0 [us^-1]", 0.4e-3, p.gamma0 * 1e3),
                c("c1(0)/c0(0)", 0.291 / 0.956, self.scenario.initial.c1.re / self.scenario.initial.c0.re),
            ],
            "fig4-deviation" => vec![
                c("gamma1 [ns^-1]", 0.1, p.gamma1),
                c("omega10/2pi [GHz]", 5.0, p.omega10() / TAU),
                c("gamma1/gamma0", 150.0, p.gamma1 / p.gamma0),
                c("gamma01 [ns^-1]", (p.gamma0 * p.gamma1).sqrt(), p.gamma01),
                c("c1(0)", FRAC_1_SQRT_2, self.scenario.initial.c1.re),
                c("c0(0)", FRAC_1_SQRT_2, self.scenario.initial.c0.re),
            ],
            _ => Vec::new(),
        }
    }

    pub fn verify(&self) -> Result<(), CliError> {
        match self.checks().into_iter().find(|c| !c.passes()) {
            None => Ok(()),
            Some(c) => Err(CliError::Usage(format!(
                "preset {} fails its check on {}: quoted {}, got {}",
                self.name, c.label, c.quoted, c.actual
            ))),
        }
    }
}

pub fn presets() -> Vec<Preset> {
    vec![fig2(), fig3(), fig4()]
}

/// Looks up and verifies a preset.
pub fn preset(name: &str) -> Result<Preset, CliError> {
    let p = presets().into_iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<_> = presets().iter().map(|p| p.name).collect();
        CliError::Usage(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    p.verify()?;
    Ok(p)
}
