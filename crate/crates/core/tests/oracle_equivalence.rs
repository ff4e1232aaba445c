mod common;

use common::{random_params, random_state, rng};
use phase_qubit::hamiltonians::{build_lab_frame, build_rwa, build_zero_drive, ConstantGenerator};
use phase_qubit::oracle::{expm_const, integrate, integrate_grid, IntegratorConfig};
use phase_qubit::propagators::{linspace, rwa_amplitudes, rwa_populations, zero_drive_amplitudes};
use phase_qubit::units::{to_canonical, Unit};
use phase_qubit::{Params, State};
use rand::Rng;

const CASES: usize = 1000;

fn tight() -> IntegratorConfig<f64> {
    IntegratorConfig::default().with_tolerances(1e-12, 1e-14)
}

#[test]
fn rwa_closed_form_matches_integration() {
    let mut rng = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let p = random_params(&mut rng);
        let u0 = random_state(&mut rng);
        let t = rng.gen_range(0.0..10.0);
        let closed = rwa_amplitudes(&u0, &p, t).unwrap();
        let numeric = integrate(&ConstantGenerator(build_rwa(&p)), &u0, 0.0, t, &tight()).unwrap();
        worst = worst.max(closed.max_abs_diff(&numeric));
    }
    assert!(worst <= 1e-9, "worst deviation {worst:e}");
}

#[test]
fn zero_drive_matches_integration() {
    let mut rng = rng(12);
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let p = random_params(&mut rng);
        let u0 = random_state(&mut rng);
        let t = rng.gen_range(0.0..10.0);
        let closed = zero_drive_amplitudes(&u0, &p, t).unwrap();
        let numeric = integrate(&ConstantGenerator(build_zero_drive(&p)), &u0, 0.0, t, &tight()).unwrap();
        worst = worst.max(closed.max_abs_diff(&numeric));
    }
    assert!(worst <= 1e-9, "worst deviation {worst:e}");
}

#[test]
fn integration_tracks_exponential_within_ten_rel_tol() {
    let mut rng = rng(13);
    let cfg = IntegratorConfig::default().with_tolerances(1e-8, 1e-10);
    for _ in 0..CASES {
        let p = random_params(&mut rng);
        let g = if rng.gen_bool(0.5) { build_rwa(&p) } else { build_zero_drive(&p) };
        let u0 = random_state(&mut rng);
        let t = rng.gen_range(0.0..10.0);
        let exact = expm_const(&g, t).unwrap().apply(&u0);
        let numeric = integrate(&ConstantGenerator(g), &u0, 0.0, t, &cfg).unwrap();
        let err = exact.max_abs_diff(&numeric);
        assert!(err <= 10.0 * cfg.rel_tol, "{err:e}");
    }
}

#[test]
fn tighter_tolerance_reduces_error() {
    let mut rng = rng(14);
    let cases = 200;
    let mut worse = 0;
    for _ in 0..cases {
        let p = random_params(&mut rng);
        let g = build_rwa(&p);
        let u0 = random_state(&mut rng);
        let t = rng.gen_range(1.0..10.0);
        let exact = expm_const(&g, t).unwrap().apply(&u0);
        let err = |tol: f64| {
            let cfg = IntegratorConfig::default().with_tolerances(tol, tol * 1e-2);
            integrate(&ConstantGenerator(g), &u0, 0.0, t, &cfg).unwrap().max_abs_diff(&exact)
        };
        if err(0.5e-6) > err(1e-6) {
            worse += 1;
        }
    }
    assert!(worse * 20 <= cases, "{worse} of {cases} cases got worse");
}

#[test]
fn integration_preserves_norm_decrease() {
    let mut rng = rng(15);
    let cfg = IntegratorConfig::default().with_tolerances(1e-9, 1e-11);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let u0 = random_state(&mut rng);
        let grid = linspace(0.0, 10.0, 21);
        let states = integrate_grid(&build_lab_frame(&p), &u0, 0.0, &grid, &cfg).unwrap();
        let mut prev = u0.norm_sqr();
        for s in states {
            assert!(s.norm_sqr() <= prev + 10.0 * cfg.abs_tol);
            prev = s.norm_sqr();
        }
    }
}

#[test]
fn fig3_regime_against_oracle() {
    let p = Params::builder()
        .omega10(to_canonical(5.0, Unit::GHz))
        .rabi0(to_canonical(0.47, Unit::MHz))
        .detuning(to_canonical(1.34, Unit::MHz))
        .gamma_mean(to_canonical(0.204, Unit::PerUs))
        .gamma0(to_canonical(0.4e-3, Unit::PerUs))
        .build()
        .unwrap();
    let u0 = State::from_real(0.291, 0.956).normalized();
    let gen = ConstantGenerator(build_rwa(&p));
    for us in [0.5, 1.0, 2.0] {
        let t = to_canonical(us, Unit::Us);
        let closed = rwa_amplitudes(&u0, &p, t).unwrap();
        let numeric = integrate(&gen, &u0, 0.0, t, &IntegratorConfig::default().with_tolerances(1e-13, 1e-15)).unwrap();
        assert!(closed.max_abs_diff(&numeric) < 1e-9, "{us} us: {:e}", closed.max_abs_diff(&numeric));
    }
}

#[test]
fn lab_frame_population_follows_rwa() {
    let omega10 = to_canonical(5.0, Unit::GHz);
    let p = Params::builder()
        .omega10(omega10)
        .rabi0(to_canonical(80.0, Unit::MHz))
        .detuning(0.0)
        .gamma0(0.0)
        .gamma1(0.07)
        .gamma01(0.0)
        .drive_phase(-std::f64::consts::FRAC_PI_2)
        .build()
        .unwrap();
    assert!(omega10 / p.rabi0 >= 50.0);
    let u0 = State::from_real(0.3, 0.8).normalized();
    let period = std::f64::consts::TAU / phase_qubit::derive_rwa(&p).unwrap().omega_c.norm();
    let grid = linspace(0.0, 2.0 * period, 400);
    let lab = integrate_grid(&build_lab_frame(&p), &u0, 0.0, &grid, &tight()).unwrap();
    let worst = grid
        .iter()
        .zip(&lab)
        .map(|(t, s)| (s.populations().0 - rwa_populations(&u0, &p, *t).unwrap().0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 5e-2, "{worst}");
}
