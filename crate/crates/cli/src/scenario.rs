use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use phase_qubit::propagators::linspace;
use phase_qubit::series::json_number;
use phase_qubit::units::{to_canonical, Dimension, Unit};
use phase_qubit::{Backend, Params, PropagationRequest, Series, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::analysis::{deviation_curve, envelope_rate};
use crate::error::CliError;

/// Uniform time grid `t0:t1:n`, in ns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self, CliError> {
        if n < 2 {
            return Err(CliError::Usage(format!("grid needs at least 2 points, got {n}")));
        }
        if !(t0 >= 0.0 && t1 > t0 && t1.is_finite()) {
            return Err(CliError::Usage(format!("grid must satisfy 0 <= t0 < t1, got {t0}:{t1}")));
        }
        Ok(Self { t0, t1, n })
    }

    pub fn times(&self) -> Vec<f64> {
        linspace(self.t0, self.t1, self.n)
    }

    /// Parses `t0:t1:n` with both times in `unit`.
    pub fn parse(s: &str, unit: Unit) -> Result<Self, CliError> {
        if unit.dimension() != Dimension::Time {
            return Err(CliError::Usage(format!("grid unit must be a time unit, got {unit}")));
        }
        let bad = || CliError::Usage(format!("invalid grid `{s}` (expected t0:t1:n)"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let t0: f64 = a.parse().map_err(|_| bad())?;
        let t1: f64 = b.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        Grid::new(to_canonical(t0, unit), to_canonical(t1, unit), n)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.t0, self.t1, self.n)
    }
}

/// `c1_re,c1_im,c0_re,c0_im`. Norms within 1e-3 of one are renormalized
/// exactly; anything further off is rejected.
pub fn parse_initial(s: &str) -> Result<State, CliError> {
    let bad = |m: &str| CliError::Usage(format!("invalid initial state `{s}`: {m}"));
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected four numbers c1_re,c1_im,c0_re,c0_im"))?;
    let [a, b, c, d] = v.as_slice() else {
        return Err(bad("expected four numbers c1_re,c1_im,c0_re,c0_im"));
    };
    let u = State::new(Complex::new(*a, *b), Complex::new(*c, *d));
    if !u.is_finite() || (u.norm_sqr() - 1.0).abs() > 1e-3 {
        return Err(bad("norm must be 1"));
    }
    Ok(u.normalized())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: Params,
    pub initial: State,
    pub grid: Grid,
    pub mode: Backend,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: &'static str,
    pub points: usize,
    pub t_start_ns: f64,
    pub t_end_ns: f64,
    pub final_rho11: f64,
    pub final_rho00: f64,
    pub final_p_esc: f64,
    pub max_rho11: f64,
    /// Rate fitted to the oscillation amplitude of ρ₁₁, ns⁻¹.
    pub envelope_rate_per_ns: Option<f64>,
    /// max |F(t)| over the grid; undriven scenarios only.
    pub max_abs_f: Option<f64>,
    pub f_undefined_points: Option<usize>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

pub struct RunOutput {
    pub series: Series,
    pub summary: Summary,
}

impl RunOutput {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.series.to_csv(),
            Format::Json => self.series.to_json(),
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Result<RunOutput, CliError> {
    let times = s.grid.times();
    let request = PropagationRequest::new(s.initial, s.params, times.clone(), s.mode);
    let series = request.series()?;
    let rho11 = series.column("rho11").expect("rho11 column");
    let last = series.rows.last().expect("grid has points");

    let (max_abs_f, f_undefined_points) = if s.mode == Backend::ZeroDrive && s.params.gamma0 > 0.0 {
        let (curve, undefined) = deviation_curve(&s.initial, &s.params, &times)?;
        let m = curve.iter().map(|(_, f)| f.abs()).fold(0.0, f64::max);
        (Some(m), Some(undefined))
    } else {
        (None, None)
    };

    let summary = Summary {
        scenario: s.name.clone(),
        mode: s.mode.name(),
        points: series.len(),
        t_start_ns: s.grid.t0,
        t_end_ns: s.grid.t1,
        final_rho11: last.rho11,
        final_rho00: last.rho00,
        final_p_esc: last.p_esc,
        max_rho11: rho11.iter().copied().fold(0.0, f64::max),
        envelope_rate_per_ns: envelope_rate(&times, &rho11),
        max_abs_f,
        f_undefined_points,
    };
    Ok(RunOutput { series, summary })
}

/// `t,p` data for the fitter: ρ₁₁ on the grid plus optional Gaussian noise
/// drawn from a ChaCha stream seeded with `seed`.
pub fn fit_data_csv(series: &Series, noise: Option<f64>, seed: u64) -> Result<String, CliError> {
    let mut out = String::from("# time_unit = ns\nt,p\n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = match noise {
        Some(sigma) if sigma > 0.0 && sigma.is_finite() => Some(Normal::new(0.0, sigma).unwrap()),
        Some(sigma) if sigma == 0.0 => None,
        Some(sigma) => return Err(CliError::Usage(format!("noise must be a finite non-negative number, got {sigma}"))),
        None => None,
    };
    for (t, r) in series.times.iter().zip(&series.rows) {
        let p = r.rho11 + normal.map_or(0.0, |n| n.sample(&mut rng));
        out.push_str(&json_number(*t));
        out.push(',');
        out.push_str(&json_number(p));
        out.push('\n');
    }
    Ok(out)
}
