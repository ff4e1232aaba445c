//! Generators `G = H − iW` of the effective non-Hermitian dynamics
//! `i du/dt = G u`, all laid out in the (|1⟩, |0⟩) ordering.

use num_complex::Complex;

use crate::matrix::{Generator2, Mat2};
use crate::params::QubitParams;
use crate::scalar::Real;

/// A generator that may depend on time.
pub trait TimeDependentGenerator<T: Real>: Sync {
    fn eval(&self, t: T) -> Generator2<T>;

    /// Period of the time dependence; `None` for a constant generator.
    fn period(&self) -> Option<T>;
}

/// Time-independent generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantGenerator<T>(pub Generator2<T>);

impl<T: Real> TimeDependentGenerator<T> for ConstantGenerator<T> {
    fn eval(&self, _t: T) -> Generator2<T> {
        self.0
    }

    fn period(&self) -> Option<T> {
        None
    }
}

/// Lab-frame effective Hamiltonian with the drive `Ω₀ cos(ωt + φ)` on the
/// off-diagonal and the full decay matrix `W = ½[[Γ₁, Γ₀₁], [Γ₁₀, Γ₀]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabFrameGenerator<T> {
    pub params: QubitParams<T>,
}

impl<T: Real> LabFrameGenerator<T> {
    /// The decay matrix `W`.
    pub fn decay(&self) -> Mat2<T> {
        decay_matrix(&self.params, self.params.gamma01)
    }
}

impl<T: Real> TimeDependentGenerator<T> for LabFrameGenerator<T> {
    fn eval(&self, t: T) -> Generator2<T> {
        let p = &self.params;
        let drive = p.rabi0 * (p.drive_freq * t + p.drive_phase).cos();
        let h = Mat2::new(
            Complex::from(p.omega1),
            Complex::from(drive),
            Complex::from(drive),
            Complex::from(p.omega0),
        );
        h - self.decay().scale(Complex::i())
    }

    fn period(&self) -> Option<T> {
        let p = &self.params;
        if p.rabi0 == T::zero() || p.drive_freq == T::zero() {
            None
        } else {
            Some(T::TAU() / p.drive_freq)
        }
    }
}

fn decay_matrix<T: Real>(p: &QubitParams<T>, gamma01: T) -> Mat2<T> {
    let h = T::lit(0.5);
    Mat2::new(
        Complex::from(p.gamma1 * h),
        Complex::from(gamma01 * h),
        Complex::from(gamma01 * h),
        Complex::from(p.gamma0 * h),
    )
}

pub fn build_lab_frame<T: Real>(params: &QubitParams<T>) -> LabFrameGenerator<T> {
    LabFrameGenerator { params: *params }
}

/// Rotating-wave generator
/// `½[[λ₀ + Δ − iΓ₁, Ω₀e^{−iφ}], [Ω₀e^{iφ}, λ₀ − Δ − iΓ₀]]`.
///
/// Γ₀₁ is not part of it: in the rotating frame the cross-channel term
/// oscillates at the drive frequency and is dropped with the other fast terms.
pub fn build_rwa<T: Real>(params: &QubitParams<T>) -> Generator2<T> {
    let h = T::lit(0.5);
    let lambda0 = params.lambda0();
    let delta = params.detuning();
    let phase = params.drive_phase;
    Mat2::new(
        Complex::new(lambda0 + delta, -params.gamma1) * h,
        Complex::from_polar(params.rabi0, -phase) * h,
        Complex::from_polar(params.rabi0, phase) * h,
        Complex::new(lambda0 - delta, -params.gamma0) * h,
    )
}

/// Undriven generator `[[ω₁ − iΓ₁/2, −iΓ₀₁/2], [−iΓ₀₁/2, ω₀ − iΓ₀/2]]`.
/// `rabi0` is ignored; Γ₀₁ is taken from `params`.
pub fn build_zero_drive<T: Real>(params: &QubitParams<T>) -> Generator2<T> {
    let h = Mat2::diag(Complex::from(params.omega1), Complex::from(params.omega0));
    h - decay_matrix(params, params.gamma01).scale(Complex::i())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_canonical, Unit};
    use num_traits::Zero;

    fn params() -> QubitParams<f64> {
        QubitParams::builder()
            .omega10(12.0)
            .detuning(0.3)
            .gamma0(0.02)
            .gamma1(0.3)
            .rabi0(0.7)
            .drive_phase(0.4)
            .build()
            .unwrap()
    }

    fn is_hermitian(g: &Mat2<f64>) -> bool {
        g.max_abs_diff(&g.adjoint()) < 1e-15
    }

    #[test]
    fn lab_frame_at_drive_node_is_diagonal() {
        let p = params().with_cross_rate(0.0);
        let gen = build_lab_frame(&p);
        // ωt + φ = π/2
        let t = (std::f64::consts::FRAC_PI_2 - p.drive_phase) / p.drive_freq;
        let g = gen.eval(t);
        assert!(g.m[0][1].norm() < 1e-14 && g.m[1][0].norm() < 1e-14);
        assert!((g.m[0][0] - Complex::new(p.omega1, -p.gamma1 / 2.0)).norm() < 1e-15);
        assert!((g.m[1][1] - Complex::new(p.omega0, -p.gamma0 / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn lab_frame_bloch_preset_drive_vanishes_at_origin() {
        let p = QubitParams::builder()
            .omega10(to_canonical(5.0, Unit::GHz))
            .gamma0(0.0)
            .gamma_mean(0.035)
            .rabi0(to_canonical(80.0, Unit::MHz))
            .drive_phase(-std::f64::consts::FRAC_PI_2)
            .build()
            .unwrap();
        assert!((p.gamma1 - 0.07).abs() < 1e-15);
        let g = build_lab_frame(&p).eval(0.0);
        assert!(g.m[0][1].re.abs() < 1e-16);
    }

    #[test]
    fn lossless_generators_are_hermitian() {
        let p = QubitParams {
            gamma0: 0.0,
            gamma1: 0.0,
            gamma01: 0.0,
            ..params()
        };
        let gen = build_lab_frame(&p);
        for k in 0..50 {
            assert!(is_hermitian(&gen.eval(0.137 * k as f64)));
        }
        assert!(is_hermitian(&build_rwa(&p)));
        assert!(is_hermitian(&build_zero_drive(&p)));
    }

    #[test]
    fn resonant_rwa_is_sigma_x() {
        let p = QubitParams::builder()
            .omega0(-5.0)
            .omega1(5.0)
            .gamma1(0.0)
            .rabi0(0.8)
            .build()
            .unwrap();
        let g = build_rwa(&p);
        let expected = Mat2::new(
            Complex::zero(),
            Complex::new(0.4, 0.0),
            Complex::new(0.4, 0.0),
            Complex::zero(),
        );
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rwa_trace() {
        let p = params();
        let tr = build_rwa(&p).trace();
        assert!((tr - Complex::new(p.lambda0(), -p.gamma_mean())).norm() < 1e-14);
    }

    #[test]
    fn zero_drive_entries() {
        let p = params().with_physical_cross_rate();
        let g = build_zero_drive(&p);
        let x = Complex::new(0.0, -p.gamma01 / 2.0);
        assert_eq!(g.m[0][1], x);
        assert_eq!(g.m[1][0], x);
        let decoupled = build_zero_drive(&p.with_cross_rate(0.0));
        assert_eq!(decoupled.m[0][1], Complex::zero());
    }

    #[test]
    fn decay_part_of_every_builder() {
        let p = params().with_physical_cross_rate();
        let w_lab = build_lab_frame(&p).eval(0.77).anti_hermitian_part();
        let w_zero = build_zero_drive(&p).anti_hermitian_part();
        let expected = Mat2::new(
            Complex::from(p.gamma1 / 2.0),
            Complex::from(p.gamma01 / 2.0),
            Complex::from(p.gamma01 / 2.0),
            Complex::from(p.gamma0 / 2.0),
        );
        assert!(w_lab.max_abs_diff(&expected) < 1e-15);
        assert!(w_zero.max_abs_diff(&expected) < 1e-15);
        let w_rwa = build_rwa(&p).anti_hermitian_part();
        let expected_rwa = Mat2::diag(Complex::from(p.gamma1 / 2.0), Complex::from(p.gamma0 / 2.0));
        assert!(w_rwa.max_abs_diff(&expected_rwa) < 1e-15);
        // positive semidefinite
        assert!(w_zero.trace().re >= 0.0 && w_zero.det().re >= -1e-15);
    }

    #[test]
    fn drive_averages_out_over_a_period() {
        let p = params().with_physical_cross_rate();
        let gen = build_lab_frame(&p);
        let period = gen.period().unwrap();
        // periodic trapezoid rule is spectrally accurate for a pure cosine
        let n = 64;
        let mut sum = Complex::zero();
        for k in 0..n {
            sum += gen.eval(period * k as f64 / n as f64).m[0][1];
        }
        let mean = sum / n as f64;
        assert!((mean - Complex::new(0.0, -p.gamma01 / 2.0)).norm() < 1e-10);
    }

    #[test]
    fn rwa_splitting_matches_complex_rabi_frequency() {
        let p = QubitParams::builder()
            .omega10(to_canonical(5.0, Unit::GHz))
            .rabi0(to_canonical(0.47, Unit::MHz))
            .detuning(to_canonical(1.34, Unit::MHz))
            .gamma0(to_canonical(0.4e-3, Unit::PerUs))
            .gamma_mean(to_canonical(0.204, Unit::PerUs))
            .build()
            .unwrap();
        let g = build_rwa(&p);
        // eigenvalues from the characteristic polynomial λ² − tr λ + det = 0
        let tr = g.trace();
        let disc = (tr * tr - g.det() * 4.0).sqrt();
        let split = disc;
        let omega: Complex<f64> = crate::params::derive_rwa(&p).unwrap().omega_c;
        let split = if split.re < 0.0 { -split } else { split };
        // tr² − 4det cancels down from |tr|² to |Ω|²
        assert!((split - omega).norm() < 1e-8 * omega.norm(), "{split} vs {omega}");
    }
}
