//! Pure two-level states, their populations and Bloch-vector view.

use num_complex::Complex;
use num_traits::Zero;

use crate::matrix::Mat2;
use crate::scalar::Real;

/// `C₁|1⟩ + C₀|0⟩`. The norm is allowed to shrink: the missing weight is the
/// probability of having tunneled into the continuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState<T> {
    pub c1: Complex<T>,
    pub c0: Complex<T>,
}

/// Bloch components of a possibly subnormalized pure state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T> {
    /// ⟨u|u⟩
    pub n0: T,
    pub nx: T,
    pub ny: T,
    pub nz: T,
}

impl<T: Real> QubitState<T> {
    pub fn new(c1: Complex<T>, c0: Complex<T>) -> Self {
        Self { c1, c0 }
    }

    pub fn from_real(c1: T, c0: T) -> Self {
        Self::new(Complex::from(c1), Complex::from(c0))
    }

    /// |0⟩
    pub fn ground() -> Self {
        Self::from_real(T::zero(), T::one())
    }

    /// |1⟩
    pub fn excited() -> Self {
        Self::from_real(T::one(), T::zero())
    }

    /// `sqrt(ρ₁₁) e^{iϕ}|1⟩ + sqrt(1 − ρ₁₁)|0⟩`
    pub fn from_population(rho11: T, rel_phase: T) -> Self {
        let rho11 = rho11.max(T::zero()).min(T::one());
        Self::new(
            Complex::from_polar(rho11.sqrt(), rel_phase),
            Complex::from((T::one() - rho11).sqrt()),
        )
    }

    /// One pure-state preimage of a Bloch vector with `|n| = n0`, chosen with
    /// a real non-negative `C₁`.
    pub fn from_bloch(b: &BlochState<T>) -> Self {
        let two = T::lit(2.0);
        let p1 = ((b.n0 + b.nz) / two).max(T::zero());
        if p1 <= T::epsilon() * b.n0.abs() {
            return Self::new(Complex::zero(), Complex::from(b.n0.max(T::zero()).sqrt()));
        }
        let c1 = p1.sqrt();
        // C₁* C₀ = (nx + i ny)/2
        let c0 = Complex::new(b.nx, b.ny) / (two * c1);
        Self::new(Complex::from(c1), c0)
    }

    pub fn norm_sqr(&self) -> T {
        self.c1.norm_sqr() + self.c0.norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.c1 / n, self.c0 / n)
    }

    pub fn with_global_phase(&self, alpha: T) -> Self {
        let z = Complex::from_polar(T::one(), alpha);
        Self::new(self.c1 * z, self.c0 * z)
    }

    pub fn is_finite(&self) -> bool {
        [self.c1, self.c0]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn amplitudes(&self) -> [Complex<T>; 2] {
        [self.c1, self.c0]
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        crate::scalar::max_abs_diff(&self.amplitudes(), &other.amplitudes())
    }

    /// `(ρ₁₁, ρ₀₀) = (|C₁|², |C₀|²)`
    pub fn populations(&self) -> (T, T) {
        (self.c1.norm_sqr(), self.c0.norm_sqr())
    }

    /// `n = ⟨u|σ|u⟩` with |1⟩ at `σz = +1`.
    pub fn bloch(&self) -> BlochState<T> {
        let (p1, p0) = self.populations();
        let cross = self.c1.conj() * self.c0;
        BlochState {
            n0: p1 + p0,
            nx: T::lit(2.0) * cross.re,
            ny: T::lit(2.0) * cross.im,
            nz: p1 - p0,
        }
    }

    /// `|u⟩⟨u|`
    pub fn outer(&self) -> Mat2<T> {
        Mat2::new(
            self.c1 * self.c1.conj(),
            self.c1 * self.c0.conj(),
            self.c0 * self.c1.conj(),
            self.c0 * self.c0.conj(),
        )
    }
}

/// Free-function form of [`QubitState::populations`].
pub fn populations<T: Real>(state: &QubitState<T>) -> (T, T) {
    state.populations()
}

/// Free-function form of [`QubitState::bloch`].
pub fn bloch<T: Real>(state: &QubitState<T>) -> BlochState<T> {
    state.bloch()
}

impl<T: Real> BlochState<T> {
    pub fn new(n0: T, nx: T, ny: T, nz: T) -> Self {
        Self { n0, nx, ny, nz }
    }

    pub fn length(&self) -> T {
        (self.nx * self.nx + self.ny * self.ny + self.nz * self.nz).sqrt()
    }

    /// `(n0 I + nx σx + ny σy + nz σz)/2`
    pub fn to_density(&self) -> Mat2<T> {
        let h = T::lit(0.5);
        Mat2::new(
            Complex::from((self.n0 + self.nz) * h),
            Complex::new(self.nx * h, -self.ny * h),
            Complex::new(self.nx * h, self.ny * h),
            Complex::from((self.n0 - self.nz) * h),
        )
    }
}

/// Free-function form of [`BlochState::to_density`].
pub fn bloch_to_density<T: Real>(b: &BlochState<T>) -> Mat2<T> {
    b.to_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn basis_and_superposition_populations() {
        assert_eq!(QubitState::<f64>::ground().populations(), (0.0, 1.0));
        let (p1, p0) = QubitState::from_real(0.291, 0.956).populations();
        assert!(close(p1, 0.0847, 1e-4) && close(p0, 0.9139, 1e-4));
        let s = QubitState::new(Complex::new(0.5, 0.5), Complex::new(0.5, -0.5));
        let (p1, p0) = s.populations();
        assert!(close(p1, 0.5, 1e-15) && close(p0, 0.5, 1e-15));
    }

    #[test]
    fn bloch_of_poles_and_equator() {
        let b = QubitState::<f64>::excited().bloch();
        assert_eq!(b, BlochState::new(1.0, 0.0, 0.0, 1.0));
        let b = QubitState::from_real(FRAC_1_SQRT_2, FRAC_1_SQRT_2).bloch();
        assert!(close(b.n0, 1.0, 1e-15) && close(b.nx, 1.0, 1e-15));
        assert!(close(b.ny, 0.0, 1e-15) && close(b.nz, 0.0, 1e-15));
    }

    #[test]
    fn bloch_preimage_of_tilted_initial_vector() {
        // Solve |C₁|² − |C₀|² = −1/√2, 2 C₁* C₀ = i/√2 with C₁ real:
        // C₁ = sin(π/8), C₀ = i cos(π/8).
        let by_hand = QubitState::new(
            Complex::new((PI / 8.0).sin(), 0.0),
            Complex::new(0.0, (PI / 8.0).cos()),
        );
        let b = by_hand.bloch();
        assert!(close(b.n0, 1.0, 1e-15));
        assert!(close(b.nx, 0.0, 1e-15));
        assert!(close(b.ny, 0.7071, 1e-4) && close(b.nz, -0.7071, 1e-4));

        let target = BlochState::new(1.0, 0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        let pre = QubitState::from_bloch(&target);
        assert!(pre.max_abs_diff(&by_hand) < 1e-15);
    }

    #[test]
    fn density_from_bloch() {
        let rho = BlochState::new(1.0, 0.0, 0.0, 1.0).to_density();
        assert!(rho.max_abs_diff(&Mat2::diag(Complex::new(1.0, 0.0), Complex::zero())) < 1e-15);

        let rho = BlochState::new(1.0, 1.0, 0.0, 0.0).to_density();
        let half = Complex::new(0.5, 0.0);
        assert!(rho.max_abs_diff(&Mat2::new(half, half, half, half)) < 1e-15);

        let rho = BlochState::new(1.0, 0.0, 0.7071, -0.7071).to_density();
        let expected = Mat2::new(
            Complex::new(0.14645, 0.0),
            Complex::new(0.0, -0.35355),
            Complex::new(0.0, 0.35355),
            Complex::new(0.85355, 0.0),
        );
        assert!(rho.max_abs_diff(&expected) < 1e-5);
        assert!(rho.max_abs_diff(&rho.adjoint()) == 0.0);
        assert!(close(rho.trace().re, 1.0, 1e-15));
    }

    #[test]
    fn ground_state_preimage() {
        let pre = QubitState::from_bloch(&BlochState::new(0.25, 0.0, 0.0, -0.25));
        assert_eq!(pre.c1, Complex::zero());
        assert!(close(pre.c0.re, 0.5, 1e-15));
    }
}
