//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the model is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest `|Im z|` accepted by complex `exp`/`sin`/`cos` before the
    /// result is reported as an overflow.
    const EXP_GUARD: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn exp_guard() -> Self {
        Self::lit(Self::EXP_GUARD)
    }
}

impl Real for f64 {
    const EXP_GUARD: f64 = 700.0;
}

impl Real for f32 {
    const EXP_GUARD: f64 = 80.0;
}

/// Principal square root with the branch pinned to `Re >= 0`, and `Im >= 0`
/// on the imaginary axis.
pub fn principal_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let s = z.sqrt();
    if s.re < T::zero() || (s.re == T::zero() && s.im < T::zero()) {
        -s
    } else {
        s
    }
}

/// `sin(w t / 2) / w`, continuous through `w = 0` where it tends to `t / 2`.
pub(crate) fn half_sinc<T: Real>(w: Complex<T>, t: T) -> Complex<T> {
    let x = w * (t / T::lit(2.0));
    let small = T::epsilon().powf(T::lit(0.25));
    if x.norm() < small {
        let x2 = x * x;
        let series = Complex::from(T::one()) - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0);
        series * (t / T::lit(2.0))
    } else {
        x.sin() / w
    }
}

/// Largest absolute entry difference; used throughout tests and reports.
pub fn max_abs_diff<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_has_nonnegative_real_part() {
        let s = principal_sqrt(Complex::new(-4.0_f64, -0.0));
        assert_eq!(s, Complex::new(0.0, 2.0));
        let s = principal_sqrt(Complex::new(3.0_f64, -4.0));
        assert!(s.re > 0.0);
        assert!((s * s - Complex::new(3.0, -4.0)).norm() < 1e-14);
    }

    #[test]
    fn half_sinc_is_continuous_at_zero() {
        let t = 2.5_f64;
        let at_zero = half_sinc(Complex::new(0.0, 0.0), t);
        assert_eq!(at_zero, Complex::new(1.25, 0.0));
        let near = half_sinc(Complex::new(1e-5, 1e-5), t);
        let direct = (Complex::new(1e-5, 1e-5) * t / 2.0).sin() / Complex::new(1e-5, 1e-5);
        assert!((near - direct).norm() < 1e-12);
        let w = Complex::new(0.3, -0.1);
        assert!((half_sinc(w, t) - (w * t / 2.0).sin() / w).norm() < 1e-15);
    }

    #[test]
    fn f32_is_supported() {
        let s = principal_sqrt(Complex::new(0.25_f32, 0.0));
        assert_eq!(s.re, 0.5);
        assert!(f32::exp_guard() < 88.0);
    }
}
