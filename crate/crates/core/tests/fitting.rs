mod common;

use phase_qubit::fitting::{parse_fit_csv, DataPoint, FitModel, FitParam, FitProblem};
use phase_qubit::propagators::{linspace, rwa_populations, upper_population_special};
use phase_qubit::units::{to_canonical, Unit};
use phase_qubit::{Params, State};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn fig3() -> Params {
    Params::builder()
        .omega10(to_canonical(5.0, Unit::GHz))
        .rabi0(to_canonical(0.47, Unit::MHz))
        .detuning(to_canonical(1.34, Unit::MHz))
        .gamma_mean(to_canonical(0.204, Unit::PerUs))
        .gamma0(to_canonical(0.4e-3, Unit::PerUs))
        .build()
        .unwrap()
}

fn ground_start_data(p: &Params, noise: Option<(f64, &mut rand_chacha::ChaCha8Rng)>) -> Vec<DataPoint<f64>> {
    let times = linspace(0.0, 10_000.0, 200);
    let mut clean: Vec<DataPoint<f64>> = times
        .iter()
        .map(|&t| DataPoint::new(t, upper_population_special(p, t).unwrap()))
        .collect();
    if let Some((sigma, rng)) = noise {
        let n = Normal::new(0.0, sigma).unwrap();
        for d in &mut clean {
            d.p += n.sample(rng);
        }
    }
    clean
}

fn problem(p: &Params, data: Vec<DataPoint<f64>>) -> FitProblem<f64> {
    FitProblem::new(data, FitModel::GroundStart, p.gamma_mean(), p.gamma0)
}

#[test]
fn jacobian_is_step_consistent() {
    let p = fig3();
    let mut rng = common::rng(31);
    let prob = problem(&p, ground_start_data(&p, Some((0.01, &mut rng))));
    for _ in 0..20 {
        let x = [
            p.rabi0 * rng.gen_range(0.7..1.3),
            p.detuning() * rng.gen_range(0.7..1.3),
        ];
        let coarse = prob.jacobian(&x, 1.0).unwrap();
        let fine = prob.jacobian(&x, 0.5).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff = c.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(diff <= 1e-5 * norm, "{diff:e} vs {norm:e}");
        }
    }
}

#[test]
fn weight_scaling_leaves_the_minimum_in_place() {
    let p = fig3();
    let mut rng = common::rng(32);
    let data = ground_start_data(&p, Some((0.01, &mut rng)));
    let base = problem(&p, data.clone()).fit().unwrap();
    for c in [1e-3, 7.0, 1e4] {
        let scaled: Vec<_> = data.iter().map(|d| DataPoint { weight: d.weight * c, ..*d }).collect();
        let fit = problem(&p, scaled).fit().unwrap();
        for param in [FitParam::Rabi0, FitParam::Detuning] {
            let rel = (fit.get(param) / base.get(param) - 1.0).abs();
            assert!(rel <= 1e-10, "{param} at c = {c}: {rel:e}");
        }
    }
}

#[test]
fn refit_from_the_optimum_is_immediate() {
    let p = fig3();
    let mut rng = common::rng(33);
    let data = ground_start_data(&p, Some((0.01, &mut rng)));
    let first = problem(&p, data.clone()).fit().unwrap();
    let seed = [FitParam::Rabi0, FitParam::Detuning]
        .into_iter()
        .map(|k| (k, first.get(k)))
        .collect();
    let again = problem(&p, data).with_seed(seed).fit().unwrap();
    assert!(again.iterations <= 2, "{} iterations", again.iterations);
    for k in [FitParam::Rabi0, FitParam::Detuning] {
        assert!((again.get(k) / first.get(k) - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn noisy_recovery_and_covariance() {
    let p = fig3();
    let mut rng = common::rng(34);
    let fit = problem(&p, ground_start_data(&p, Some((0.01, &mut rng)))).fit().unwrap();
    assert!(!fit.degenerate);
    let cov = fit.covariance.as_ref().unwrap();
    let sigma_rabi = cov[0][0].sqrt();
    assert!(sigma_rabi > 0.0);
    // the truth lies within a few standard errors
    assert!((fit.get(FitParam::Rabi0) - p.rabi0).abs() < 5.0 * sigma_rabi);
    assert!((fit.get(FitParam::Rabi0) / p.rabi0 - 1.0).abs() < 0.05);
}

#[test]
fn general_model_recovers_initial_state() {
    let p = fig3();
    let u0 = State::from_population(0.3, 0.8);
    let data: Vec<_> = linspace(0.0, 10_000.0, 300)
        .into_iter()
        .map(|t| DataPoint::new(t, rwa_populations(&u0, &p, t).unwrap().0))
        .collect();
    let fit = FitProblem::new(data, FitModel::General, p.gamma_mean(), p.gamma0).fit().unwrap();
    assert!(fit.residual_norm < 1e-8, "{}", fit.residual_norm);
    assert!((fit.get(FitParam::Rho11Initial) - 0.3).abs() < 1e-6);
    assert!((fit.get(FitParam::Rabi0) / p.rabi0 - 1.0).abs() < 1e-6);
}

#[test]
fn fits_data_read_from_csv() {
    let p = fig3();
    let mut text = String::from("# time_unit = us\nt,p\n");
    for d in ground_start_data(&p, None) {
        text.push_str(&format!("{:e},{:e}\n", d.t / 1000.0, d.p));
    }
    let data = parse_fit_csv::<f64>(&text, None).unwrap();
    let fit = problem(&p, data).fit().unwrap();
    assert!((fit.get(FitParam::Detuning) / p.detuning() - 1.0).abs() < 1e-6);
}
