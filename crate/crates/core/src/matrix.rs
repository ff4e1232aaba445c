//! Dense 2×2 complex matrices in the fixed (|1⟩, |0⟩) ordering.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{half_sinc, principal_sqrt, Real};
use crate::state::QubitState;

/// Row-major 2×2 complex matrix. Index 0 is the |1⟩ row/column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

/// Evolution generator `G` of `i du/dt = G u`.
pub type Generator2<T> = Mat2<T>;

/// The propagator `exp(-i G t)` could not be formed without overflow.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("propagator overflow: |Im(arg)| = {arg} exceeds guard {guard}")]
pub struct Overflow {
    pub arg: f64,
    pub guard: f64,
}

impl<T: Real> Mat2<T> {
    pub fn new(a11: Complex<T>, a10: Complex<T>, a01: Complex<T>, a00: Complex<T>) -> Self {
        Self {
            m: [[a11, a10], [a01, a00]],
        }
    }

    pub fn zero() -> Self {
        Self::new(Complex::zero(), Complex::zero(), Complex::zero(), Complex::zero())
    }

    pub fn identity() -> Self {
        Self::new(Complex::one(), Complex::zero(), Complex::zero(), Complex::one())
    }

    pub fn diag(a11: Complex<T>, a00: Complex<T>) -> Self {
        Self::new(a11, Complex::zero(), Complex::zero(), a00)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, u: &QubitState<T>) -> QubitState<T> {
        let m = &self.m;
        QubitState::new(m[0][0] * u.c1 + m[0][1] * u.c0, m[1][0] * u.c1 + m[1][1] * u.c0)
    }

    /// `(G + G†)/2`
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(Complex::from(T::lit(0.5)))
    }

    /// `W = i (G − G†)/2`, so that `G = H − iW` with `H`, `W` Hermitian.
    pub fn anti_hermitian_part(&self) -> Self {
        (*self - self.adjoint()).scale(Complex::new(T::zero(), T::lit(0.5)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        crate::scalar::max_abs_diff(&self.entries(), &other.entries())
    }

    /// Eigenvalue splitting `λ₊ − λ₋ = sqrt((a11 − a00)² + 4 a10 a01)`,
    /// principal branch.
    pub fn splitting(&self) -> Complex<T> {
        let m = &self.m;
        let d = m[0][0] - m[1][1];
        principal_sqrt(d * d + m[0][1] * m[1][0] * T::lit(4.0))
    }

    /// Exact `exp(-i G t)` via the trace/traceless split
    /// `e^{-i(tr/2)t} [cos(Ωt/2) I − (2i/Ω) sin(Ωt/2) (G − (tr/2) I)]`,
    /// with the Jordan-block limit at `Ω = 0`.
    pub fn propagator(&self, t: T) -> Result<Self, Overflow> {
        let half = T::lit(0.5);
        let mean = self.trace() * half;
        let omega = self.splitting();
        let guard = T::exp_guard();
        let phase_arg = (mean * t).im;
        let trig_arg = (omega * (t * half)).im.abs();
        if trig_arg > guard || phase_arg > guard {
            return Err(Overflow {
                arg: trig_arg.max(phase_arg).to_f64().unwrap_or(f64::INFINITY),
                guard: T::EXP_GUARD,
            });
        }
        let i = Complex::<T>::i();
        let global = (-i * mean * t).exp();
        let c = (omega * (t * half)).cos();
        let s = half_sinc(omega, t) * T::lit(2.0);
        let traceless = *self - Self::identity().scale(mean);
        let u = Self::identity().scale(c) - traceless.scale(i * s);
        Ok(u.scale(global))
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}
