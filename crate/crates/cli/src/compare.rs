use phase_qubit::propagators::{
    rwa_amplitudes, rwa_populations, weak_coupling_state, zero_drive_amplitudes, zero_drive_closed_form,
};
use phase_qubit::{Backend, PropagationRequest, State};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::Scenario;

/// Largest deviations between propagation routes over a scenario grid.
#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub scenario: String,
    pub points: usize,
    pub gamma01: f64,
    pub physical_gamma01: f64,
    /// Amplitude max-norm, closed-form rotating frame vs adaptive integration.
    pub rwa_vs_numeric: f64,
    /// Amplitude max-norm, exact undriven propagator vs the closed-form coefficients.
    pub zero_drive_vs_closed_form: f64,
    /// Amplitude max-norm, exact undriven propagator vs independent level decay.
    pub zero_drive_vs_weak: f64,
    /// Upper population, lab-frame integration vs rotating-frame closed form.
    pub lab_frame_vs_rwa_rho11: Option<f64>,
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn max_over<F: Fn(f64) -> Result<f64, CliError>>(times: &[f64], f: F) -> Result<f64, CliError> {
    times.iter().try_fold(0.0f64, |m, &t| Ok(m.max(f(t)?)))
}

pub fn compare_backends(s: &Scenario, with_lab_frame: bool) -> Result<CompareReport, CliError> {
    let times = s.grid.times();
    let (p, u0) = (&s.params, &s.initial);
    let numeric = PropagationRequest::new(*u0, *p, times.clone(), Backend::Numeric).run()?;
    let rwa_vs_numeric = times
        .iter()
        .zip(&numeric)
        .map(|(&t, n)| Ok(rwa_amplitudes(u0, p, t)?.max_abs_diff(n)))
        .collect::<Result<Vec<f64>, CliError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let zero_drive_vs_closed_form = max_over(&times, |t| {
        Ok(zero_drive_amplitudes(u0, p, t)?.max_abs_diff(&zero_drive_closed_form(u0, p, t)?))
    })?;
    let zero_drive_vs_weak = max_over(&times, |t| {
        Ok(zero_drive_amplitudes(u0, p, t)?.max_abs_diff(&weak_coupling_state(u0, p, t)))
    })?;
    let lab_frame_vs_rwa_rho11 = if with_lab_frame {
        let lab: Vec<State> = PropagationRequest::new(*u0, *p, times.clone(), Backend::LabFrame).run()?;
        Some(
            times
                .iter()
                .zip(&lab)
                .map(|(&t, l)| Ok((rwa_populations(u0, p, t)?.0 - l.populations().0).abs()))
                .collect::<Result<Vec<f64>, CliError>>()?
                .into_iter()
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(CompareReport {
        scenario: s.name.clone(),
        points: times.len(),
        gamma01: p.gamma01,
        physical_gamma01: p.physical_cross_rate(),
        rwa_vs_numeric,
        zero_drive_vs_closed_form,
        zero_drive_vs_weak,
        lab_frame_vs_rwa_rho11,
    })
}
