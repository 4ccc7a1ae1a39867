use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the deterministic numerics.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

/// Converts a mode index into `T`.
#[inline]
pub fn idx<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("index representable")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `1 - e^{-x}` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg<T: Scalar>(x: T) -> T {
    -(-x).exp_m1()
}

/// `coth(x)` for `x > 0`.
#[inline]
pub fn coth<T: Scalar>(x: T) -> T {
    let two = lit::<T>(2.0);
    let e = (-two * x).exp();
    (T::one() + e) / one_minus_exp_neg(two * x)
}

/// `1 / sinh(x)` for `x > 0`, stable for large `x`.
#[inline]
pub fn csch<T: Scalar>(x: T) -> T {
    let two = lit::<T>(2.0);
    two * (-x).exp() / one_minus_exp_neg(two * x)
}
