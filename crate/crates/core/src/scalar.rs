//! Scalar abstractions.
//!
//! [`Ring`] is the minimal algebra needed by the polynomial parts of the
//! closed form (Λ', Λ̃, triangle forms, Gram determinants). It is implemented
//! for floats, exact rationals, big integers and the sparse polynomial type in
//! [`crate::verify::poly`], so the same code builds numeric values and exact
//! symbolic expansions.
//!
//! [`Scalar`] adds transcendental functions for the numeric routes.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive};
use twofloat::TwoFloat;

/// Commutative ring with integer literals.
pub trait Ring:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Embeds an integer.
    fn int(v: i64) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

macro_rules! float_ring {
    ($($t:ty),*) => {$(
        impl Ring for $t {
            #[inline]
            fn int(v: i64) -> Self {
                v as $t
            }
        }
    )*};
}

float_ring!(f32, f64);

impl Ring for TwoFloat {
    fn int(v: i64) -> Self {
        TwoFloat::from(v)
    }
}

impl Ring for BigInt {
    fn int(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Ring for BigRational {
    fn int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Real scalar used by every numeric route.
pub trait Scalar: Float + FloatConst + FromPrimitive + Ring + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + Ring + Debug + Send + Sync + 'static {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite literal")
}

/// Converts a `T` into `f64` for reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// π^{3/2}.
#[inline]
pub fn pi_3_2<T: Scalar>() -> T {
    let pi = T::PI();
    pi * pi.sqrt()
}
