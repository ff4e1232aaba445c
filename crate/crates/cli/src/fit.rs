use std::f64::consts::TAU;

use phase_qubit::fitting::{parse_fit_csv, FitModel, FitParam, FitProblem, FitResult};
use phase_qubit::units::{to_canonical, Dimension, Unit};
use serde::Serialize;

use crate::error::CliError;

/// `value [unit]`; a bare number is taken in canonical units.
pub fn parse_quantity(s: &str, dim: Dimension) -> Result<f64, CliError> {
    let s = s.trim();
    // longest numeric prefix
    let split = s
        .char_indices()
        .map(|(i, c)| i + c.len_utf8())
        .filter(|&end| s[..end].parse::<f64>().is_ok())
        .last()
        .unwrap_or(0);
    let (num, unit) = s.split_at(split);
    let x: f64 = num
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse number in `{s}`")))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Ok(x);
    }
    let u: Unit = unit.parse().map_err(|e| CliError::Usage(format!("`{s}`: {e}")))?;
    if u.dimension() != dim {
        return Err(CliError::Usage(format!("`{s}`: expected a {dim:?} unit, got {u}")));
    }
    Ok(to_canonical(x, u))
}

#[derive(Clone, Debug)]
pub struct FitRequest {
    pub data_csv: String,
    pub time_unit: Option<Unit>,
    pub model: FitModel,
    /// Γ and Γ₀ in ns⁻¹.
    pub gamma: f64,
    pub gamma0: f64,
    pub free: Vec<FitParam>,
}

pub fn run_fit(req: &FitRequest) -> Result<FitResult<f64>, CliError> {
    let data = parse_fit_csv::<f64>(&req.data_csv, req.time_unit)?;
    let mut problem = FitProblem::new(data, req.model, req.gamma, req.gamma0);
    for p in &req.free {
        if !req.model.params().contains(p) {
            return Err(CliError::Usage(format!("{p} is not a parameter of the {} model", req.model.name())));
        }
        problem = problem.free(*p);
    }
    Ok(problem.fit()?)
}

#[derive(Serialize)]
struct ParamRecord {
    name: &'static str,
    value: f64,
    unit: &'static str,
    stderr: Option<f64>,
    fixed: bool,
    display_value: f64,
    display_unit: &'static str,
}

#[derive(Serialize)]
struct FitReport<'a> {
    model: &'static str,
    converged: bool,
    degenerate: bool,
    iterations: usize,
    seed_used: usize,
    seeds_tried: usize,
    residual_norm: f64,
    free: Vec<&'static str>,
    params: Vec<ParamRecord>,
    covariance: Option<&'a Vec<Vec<f64>>>,
}

fn display(p: FitParam, v: f64) -> (f64, &'static str) {
    match p {
        FitParam::Rabi0 | FitParam::Detuning => (v / TAU * 1e3, "MHz"),
        FitParam::Gamma | FitParam::Gamma0 => (v * 1e3, "us^-1"),
        FitParam::RelPhase => (v, "rad"),
        FitParam::Scale | FitParam::Rho11Initial => (v, ""),
    }
}

pub fn fit_report_json(model: FitModel, fit: &FitResult<f64>) -> String {
    let params = model
        .params()
        .iter()
        .map(|&p| {
            let value = fit.get(p);
            let idx = fit.free.iter().position(|f| *f == p);
            let stderr = match (idx, &fit.covariance) {
                (Some(i), Some(c)) => Some(c[i][i].max(0.0).sqrt()),
                _ => None,
            };
            let (display_value, display_unit) = display(p, value);
            ParamRecord {
                name: p.name(),
                value,
                unit: p.unit().map_or("", |u| u.symbol()),
                stderr,
                fixed: idx.is_none(),
                display_value,
                display_unit,
            }
        })
        .collect();
    let report = FitReport {
        model: model.name(),
        converged: fit.converged,
        degenerate: fit.degenerate,
        iterations: fit.iterations,
        seed_used: fit.seed_used,
        seeds_tried: fit.diagnostics.len(),
        residual_norm: fit.residual_norm,
        free: fit.free.iter().map(|p| p.name()).collect(),
        params,
        covariance: fit.covariance.as_ref(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("fit report serializes");
    s.push('\n');
    s
}
