//! Sampled trajectories and their CSV / JSON forms.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Real;
use crate::state::QubitState;

pub const CSV_HEADER: &str = "t_ns,rho11,rho00,p_esc,n0,nx,ny,nz";

/// Floating-point dust below zero is reported as zero.
pub const CLIP_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("{times} times but {rows} rows")]
    LengthMismatch { times: usize, rows: usize },
    #[error("row {index}: {field} = {value} outside its admissible range")]
    OutOfRange {
        index: usize,
        field: &'static str,
        value: f64,
    },
    #[error("escape probability decreases at index {0}")]
    EscapeDecreasing(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow<T> {
    pub rho11: T,
    pub rho00: T,
    pub p_esc: T,
    pub n0: T,
    pub nx: T,
    pub ny: T,
    pub nz: T,
}

impl<T: Real> SeriesRow<T> {
    /// Reporting view of a state: probabilities within `CLIP_EPS` of the
    /// unit interval are clipped onto it.
    pub fn from_state(u: &QubitState<T>) -> Self {
        let (rho11, rho00) = u.populations();
        let b = u.bloch();
        Self {
            rho11: clip(rho11),
            rho00: clip(rho00),
            p_esc: clip(T::one() - b.n0),
            n0: b.n0,
            nx: b.nx,
            ny: b.ny,
            nz: b.nz,
        }
    }

    pub fn fields(&self) -> [(&'static str, T); 7] {
        [
            ("rho11", self.rho11),
            ("rho00", self.rho00),
            ("p_esc", self.p_esc),
            ("n0", self.n0),
            ("nx", self.nx),
            ("ny", self.ny),
            ("nz", self.nz),
        ]
    }
}

fn clip<T: Real>(x: T) -> T {
    let eps = T::lit(CLIP_EPS);
    if x < T::zero() && x >= -eps {
        T::zero()
    } else if x > T::one() && x <= T::one() + eps {
        T::one()
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub rows: Vec<SeriesRow<T>>,
}

impl<T: Real> TimeSeries<T> {
    pub fn from_states(times: Vec<T>, states: &[QubitState<T>]) -> Result<Self, SeriesError> {
        if times.len() != states.len() {
            return Err(SeriesError::LengthMismatch {
                times: times.len(),
                rows: states.len(),
            });
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SeriesError::NotIncreasing(k + 1));
        }
        let rows = states.iter().map(SeriesRow::from_state).collect();
        Ok(Self { times, rows })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<T>> {
        if name == "t_ns" {
            return Some(self.times.clone());
        }
        self.rows
            .iter()
            .map(|r| r.fields().iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
            .collect()
    }

    /// Range checks on every row; `eps` is the admissible overshoot.
    pub fn validate(&self, eps: T) -> Result<(), SeriesError> {
        for (index, r) in self.rows.iter().enumerate() {
            for (field, value) in [("rho11", r.rho11), ("rho00", r.rho00), ("p_esc", r.p_esc)] {
                if !(value >= -eps && value <= T::one() + eps) {
                    return Err(SeriesError::OutOfRange {
                        index,
                        field,
                        value: value.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
            let len2 = r.nx * r.nx + r.ny * r.ny + r.nz * r.nz;
            if !(len2 <= r.n0 * r.n0 + eps) {
                return Err(SeriesError::OutOfRange {
                    index,
                    field: "bloch",
                    value: len2.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Escape probability never decreases by more than `eps` between samples.
    pub fn check_escape_monotone(&self, eps: T) -> Result<(), SeriesError> {
        match self.rows.windows(2).position(|w| w[1].p_esc < w[0].p_esc - eps) {
            Some(k) => Err(SeriesError::EscapeDecreasing(k + 1)),
            None => Ok(()),
        }
    }

    /// CSV with a fixed header and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 200);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (t, r) in self.times.iter().zip(&self.rows) {
            write!(out, "{:.16e}", t).unwrap();
            for (_, v) in r.fields() {
                write!(out, ",{:.16e}", v).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// JSON array of flat records keyed like the CSV header.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(self.len() * 260);
        out.push('[');
        for (k, (t, r)) in self.times.iter().zip(&self.rows).enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "\n  {{\"t_ns\":{}", json_number(*t)).unwrap();
            for (name, v) in r.fields() {
                write!(out, ",\"{name}\":{}", json_number(v)).unwrap();
            }
            out.push('}');
        }
        out.push_str("\n]\n");
        out
    }
}

/// 17 significant digits; non-finite values become `null`.
pub fn json_number<T: Real>(x: T) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "null".to_string()
    }
}
