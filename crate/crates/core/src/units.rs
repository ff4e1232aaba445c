//! Unit tags and conversions at the I/O boundary.
//!
//! Internally every quantity is canonical: time in ns, angular frequencies in
//! rad/ns, rates in ns⁻¹, angles in rad. Cyclic frequencies (MHz, GHz) pick up
//! the factor 2π when converted to an angular frequency.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dimension {
    AngularFrequency,
    Rate,
    Time,
    Angle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    MHz,
    GHz,
    RadPerSec,
    RadPerNs,
    PerUs,
    PerNs,
    Ns,
    Us,
    Rad,
    Deg,
    /// Multiples of π radians.
    PiRad,
}

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("cannot convert {from} ({from_dim:?}) to {to} ({to_dim:?})")]
    DimensionMismatch {
        from: Unit,
        to: Unit,
        from_dim: Dimension,
        to_dim: Dimension,
    },
    #[error("unknown unit `{0}`")]
    Unknown(String),
}

impl Unit {
    pub const ALL: [Unit; 11] = [
        Unit::MHz,
        Unit::GHz,
        Unit::RadPerSec,
        Unit::RadPerNs,
        Unit::PerUs,
        Unit::PerNs,
        Unit::Ns,
        Unit::Us,
        Unit::Rad,
        Unit::Deg,
        Unit::PiRad,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::MHz | Unit::GHz | Unit::RadPerSec | Unit::RadPerNs => {
                Dimension::AngularFrequency
            }
            Unit::PerUs | Unit::PerNs => Dimension::Rate,
            Unit::Ns | Unit::Us => Dimension::Time,
            Unit::Rad | Unit::Deg | Unit::PiRad => Dimension::Angle,
        }
    }

    /// The canonical unit of this unit's dimension.
    pub fn canonical(self) -> Unit {
        match self.dimension() {
            Dimension::AngularFrequency => Unit::RadPerNs,
            Dimension::Rate => Unit::PerNs,
            Dimension::Time => Unit::Ns,
            Dimension::Angle => Unit::Rad,
        }
    }

    // canonical = value * mul / div; powers of ten are kept as separate
    // multiply/divide steps so decimal conversions round only once.
    fn factor<T: Real>(self) -> (T, T) {
        match self {
            Unit::MHz => (T::TAU(), T::lit(1e3)),
            Unit::GHz => (T::TAU(), T::one()),
            Unit::RadPerSec => (T::one(), T::lit(1e9)),
            Unit::RadPerNs | Unit::PerNs | Unit::Ns | Unit::Rad => (T::one(), T::one()),
            Unit::PerUs => (T::one(), T::lit(1e3)),
            Unit::Us => (T::lit(1e3), T::one()),
            Unit::Deg => (T::PI(), T::lit(180.0)),
            Unit::PiRad => (T::PI(), T::one()),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::MHz => "MHz",
            Unit::GHz => "GHz",
            Unit::RadPerSec => "rad/s",
            Unit::RadPerNs => "rad/ns",
            Unit::PerUs => "us^-1",
            Unit::PerNs => "ns^-1",
            Unit::Ns => "ns",
            Unit::Us => "us",
            Unit::Rad => "rad",
            Unit::Deg => "deg",
            Unit::PiRad => "pi",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .replace(['µ', 'μ'], "u")
            .replace('⁻', "^-")
            .replace('¹', "1");
        let unit = match norm.as_str() {
            "MHz" | "mhz" => Unit::MHz,
            "GHz" | "ghz" => Unit::GHz,
            "rad/s" => Unit::RadPerSec,
            "rad/ns" => Unit::RadPerNs,
            "us^-1" | "1/us" | "/us" => Unit::PerUs,
            "ns^-1" | "1/ns" | "/ns" => Unit::PerNs,
            "ns" => Unit::Ns,
            "us" => Unit::Us,
            "rad" => Unit::Rad,
            "deg" => Unit::Deg,
            "pi" | "π" => Unit::PiRad,
            _ => return Err(UnitError::Unknown(s.trim().to_string())),
        };
        Ok(unit)
    }
}

/// Converts `value` from one unit to another of the same dimension.
pub fn convert<T: Real>(value: T, from: Unit, to: Unit) -> Result<T, UnitError> {
    if from.dimension() != to.dimension() {
        return Err(UnitError::DimensionMismatch {
            from,
            to,
            from_dim: from.dimension(),
            to_dim: to.dimension(),
        });
    }
    if from == to {
        return Ok(value);
    }
    let (mf, df) = from.factor::<T>();
    let (mt, dt) = to.factor::<T>();
    Ok(value * mf / df * dt / mt)
}

/// Converts `value` into the canonical unit of its dimension.
pub fn to_canonical<T: Real>(value: T, from: Unit) -> T {
    convert(value, from, from.canonical()).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_frequency_gets_two_pi() {
        let w = convert(80.0_f64, Unit::MHz, Unit::RadPerNs).unwrap();
        assert!((w - 2.0 * std::f64::consts::PI * 0.080).abs() < 1e-15);
        assert!((w - 0.5027).abs() < 1e-4);
    }

    #[test]
    fn powers_of_ten() {
        assert_eq!(convert(0.204_f64, Unit::PerUs, Unit::PerNs).unwrap(), 2.04e-4);
        assert_eq!(convert(1.0_f64, Unit::RadPerNs, Unit::RadPerSec).unwrap(), 1e9);
        assert_eq!(convert(3.0_f64, Unit::Us, Unit::Ns).unwrap(), 3000.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = convert(1.0_f64, Unit::GHz, Unit::PerNs).unwrap_err();
        assert!(matches!(err, UnitError::DimensionMismatch { .. }));
        assert!(convert(1.0_f64, Unit::Ns, Unit::Rad).is_err());
    }

    #[test]
    fn parses_spellings() {
        assert_eq!("µs⁻¹".parse::<Unit>().unwrap(), Unit::PerUs);
        assert_eq!("ns^-1".parse::<Unit>().unwrap(), Unit::PerNs);
        assert_eq!(" MHz ".parse::<Unit>().unwrap(), Unit::MHz);
        assert_eq!("pi".parse::<Unit>().unwrap(), Unit::PiRad);
        assert!("furlong".parse::<Unit>().is_err());
        for u in Unit::ALL {
            assert_eq!(u.symbol().parse::<Unit>().unwrap(), u);
        }
    }
}
