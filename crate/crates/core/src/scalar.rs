//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real floating point type the block-matrix machinery is generic over (`f32` or `f64`).
///
/// Entries are always complex; `Real` is the type of their real and imaginary parts.
pub trait Real: RealField + Copy + ToPrimitive + Display + Debug + Default + 'static {
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Machine epsilon of the type.
    fn eps() -> Self;
}

impl Real for f64 {
    fn lit(x: f64) -> Self {
        x
    }
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }
    fn eps() -> Self {
        f32::EPSILON
    }
}

/// Complex entry type over a real scalar.
pub type Cx<T> = Complex<T>;
/// Dense complex matrix over a real scalar.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex vector over a real scalar.
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Modulus of a complex scalar.
#[inline]
pub fn abs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}
