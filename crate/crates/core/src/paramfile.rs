//! Line-oriented parameter files.
//!
//! ```text
//! # Rabi-oscillation regime
//! omega10 = 5 GHz
//! rabi0 = 0.47 MHz
//! detuning = 1.34 MHz
//! gamma = 0.204 us^-1
//! gamma0 = 0.4e-3 us^-1
//! gamma01 = auto
//! drive_phase = -0.5 pi
//! ```
//!
//! Values without a unit are read in canonical units (rad/ns, ns⁻¹, rad).

use thiserror::Error;

use crate::params::{ParamError, QubitParams, QubitParamsBuilder};
use crate::scalar::Real;
use crate::units::{to_canonical, Dimension, Unit, UnitError};

#[derive(Debug, Error, PartialEq)]
pub enum ParamFileError {
    #[error("line {line}: expected `key = value [unit]`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: cannot parse number `{text}`")]
    Number { line: usize, text: String },
    #[error("line {line}: {source}")]
    Unit { line: usize, source: UnitError },
    #[error("line {line}: `{key}` expects a {expected:?} unit, got {unit}")]
    WrongDimension {
        line: usize,
        key: String,
        expected: Dimension,
        unit: Unit,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Recognised keys and the dimension of their values.
pub const KEYS: [(&str, Dimension); 11] = [
    ("omega0", Dimension::AngularFrequency),
    ("omega1", Dimension::AngularFrequency),
    ("omega10", Dimension::AngularFrequency),
    ("rabi0", Dimension::AngularFrequency),
    ("drive_freq", Dimension::AngularFrequency),
    ("detuning", Dimension::AngularFrequency),
    ("gamma0", Dimension::Rate),
    ("gamma1", Dimension::Rate),
    ("gamma", Dimension::Rate),
    ("gamma01", Dimension::Rate),
    ("drive_phase", Dimension::Angle),
];

pub fn parse_params<T: Real>(text: &str) -> Result<QubitParams<T>, ParamFileError> {
    let mut builder = QubitParamsBuilder::<T>::default();
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ParamFileError::Syntax { line })?;
        let key = key.trim();
        let value = value.trim();
        let (_, dim) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| ParamFileError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        if seen.contains(&key) {
            return Err(ParamFileError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        seen.push(KEYS.iter().find(|(k, _)| *k == key).unwrap().0);

        if key == "gamma01" && matches!(value, "auto" | "physical") {
            continue;
        }
        let mut parts = value.split_whitespace();
        let number = parts.next().ok_or(ParamFileError::Syntax { line })?;
        let unit_text: String = parts.collect::<Vec<_>>().join("");
        let x: f64 = number.parse().map_err(|_| ParamFileError::Number {
            line,
            text: number.to_string(),
        })?;
        let canonical = if unit_text.is_empty() {
            T::lit(x)
        } else {
            let unit: Unit = unit_text
                .parse()
                .map_err(|source| ParamFileError::Unit { line, source })?;
            if unit.dimension() != *dim {
                return Err(ParamFileError::WrongDimension {
                    line,
                    key: key.to_string(),
                    expected: *dim,
                    unit,
                });
            }
            to_canonical(T::lit(x), unit)
        };
        builder = match key {
            "omega0" => builder.omega0(canonical),
            "omega1" => builder.omega1(canonical),
            "omega10" => builder.omega10(canonical),
            "rabi0" => builder.rabi0(canonical),
            "drive_freq" => builder.drive_freq(canonical),
            "detuning" => builder.detuning(canonical),
            "gamma0" => builder.gamma0(canonical),
            "gamma1" => builder.gamma1(canonical),
            "gamma" => builder.gamma_mean(canonical),
            "gamma01" => builder.gamma01(canonical),
            "drive_phase" => builder.drive_phase(canonical),
            _ => unreachable!("key table covers every arm"),
        };
    }
    Ok(builder.build()?)
}

/// Writes `params` back out in canonical units.
pub fn format_params<T: Real>(p: &QubitParams<T>) -> String {
    format!(
        "omega0 = {:e} rad/ns\nomega1 = {:e} rad/ns\ngamma0 = {:e} ns^-1\ngamma1 = {:e} ns^-1\n\
         gamma01 = {:e} ns^-1\nrabi0 = {:e} rad/ns\ndrive_freq = {:e} rad/ns\ndrive_phase = {:e} rad\n",
        p.omega0, p.omega1, p.gamma0, p.gamma1, p.gamma01, p.rabi0, p.drive_freq, p.drive_phase
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const RABI: &str = "\
# Rabi regime
omega10 = 5 GHz
rabi0 = 0.47 MHz
detuning = 1.34 MHz   # from the fit
gamma = 0.204 µs⁻¹
gamma0 = 0.4e-3 us^-1
gamma01 = auto
drive_phase = -0.5 pi
";

    #[test]
    fn parses_units_and_comments() {
        let p: QubitParams<f64> = parse_params(RABI).unwrap();
        assert!((p.rabi0 - to_canonical(0.47, Unit::MHz)).abs() < 1e-18);
        assert!((p.detuning() - to_canonical(1.34, Unit::MHz)).abs() < 1e-14);
        assert!((p.gamma_mean() - 2.04e-4).abs() < 1e-18);
        assert!((p.gamma01 - p.physical_cross_rate()).abs() < 1e-18);
        assert!((p.drive_phase + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_params::<f64>("omega10 = 1\nrabi0 0.3\n").unwrap_err();
        assert_eq!(err, ParamFileError::Syntax { line: 2 });
        let err = parse_params::<f64>("omega10 = 1\n\nfoo = 2\n").unwrap_err();
        assert!(matches!(err, ParamFileError::UnknownKey { line: 3, .. }));
        let err = parse_params::<f64>("omega10 = x GHz\n").unwrap_err();
        assert!(matches!(err, ParamFileError::Number { line: 1, .. }));
        let err = parse_params::<f64>("omega10 = 1 GHz\ngamma1 = 0.1 GHz\n").unwrap_err();
        assert!(matches!(err, ParamFileError::WrongDimension { line: 2, .. }));
        let err = parse_params::<f64>("omega10 = 1 parsec\n").unwrap_err();
        assert!(matches!(err, ParamFileError::Unit { line: 1, .. }));
        let err = parse_params::<f64>("omega10 = 1\nomega10 = 2\n").unwrap_err();
        assert!(matches!(err, ParamFileError::Duplicate { line: 2, .. }));
        let err = parse_params::<f64>("omega10 = 1\n").unwrap_err();
        assert!(matches!(err, ParamFileError::Params(ParamError::Missing("gamma1"))));
    }

    #[test]
    fn canonical_round_trip() {
        let p: QubitParams<f64> = parse_params(RABI).unwrap();
        let q: QubitParams<f64> = parse_params(&format_params(&p)).unwrap();
        assert_eq!(p, q);
    }
}
