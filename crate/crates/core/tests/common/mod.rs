#![allow(dead_code)]

use num_complex::Complex;
use phase_qubit::{Params, State};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state<R: Rng>(rng: &mut R) -> State {
    let z: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let u = State::new(Complex::new(z[0], z[1]), Complex::new(z[2], z[3]));
    if u.norm_sqr() < 1e-6 {
        State::ground()
    } else {
        u.normalized()
    }
}

/// Valid parameters with moderate phases over `t <= 10` ns; `gamma01` sits
/// anywhere in `[0, sqrt(γ₀γ₁)]`.
pub fn random_params<R: Rng>(rng: &mut R) -> Params {
    let gamma0 = rng.gen_range(0.0..0.5);
    let gamma1 = rng.gen_range(0.0..0.5);
    let omega0 = rng.gen_range(0.0..5.0);
    let omega10 = rng.gen_range(1.0..10.0);
    let detuning = rng.gen_range(-1.0..1.0);
    Params {
        omega0,
        omega1: omega0 + omega10,
        gamma0,
        gamma1,
        gamma01: rng.gen_range(0.0..=1.0) * (gamma0 * gamma1).sqrt(),
        rabi0: rng.gen_range(0.0..2.0),
        drive_freq: omega10 - detuning,
        drive_phase: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    }
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}
