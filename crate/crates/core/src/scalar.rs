//! Scalar abstraction shared by every numerical module.
//!
//! All model and estimator code is written against [`Real`], which is
//! implemented for `f32` and `f64`. The crate root exposes `f64` aliases
//! for the common case.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent it,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over [`Real`].
pub type Cplx<T> = Complex<T>;

/// `exp(j * phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Cplx<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Wraps an angle to `[-pi, pi)`.
pub fn wrap_phase<T: Real>(phase: T) -> T {
    let two_pi = T::two_pi();
    let mut w = (phase + T::PI()) % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    let out = w - T::PI();
    // `%` can land exactly on +pi after the shift for some inputs
    if out >= T::PI() {
        out - two_pi
    } else {
        out
    }
}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Standard thermal noise temperature, K.
pub const STANDARD_NOISE_TEMPERATURE: f64 = 290.0;
