//! Numeric abstraction for the whole engine.
//!
//! Every algorithm in this crate is generic over a [`Scalar`]: plain `f32`/`f64`
//! for fast double-precision work (finite-difference checks, smoke runs) and
//! [`crate::BigReal`] for the production arbitrary-precision pipeline.
//!
//! Values carry their own binary precision. Arithmetic between two values
//! produces a result at the larger of the two precisions, so constants created
//! by [`num_traits::Zero`]/[`num_traits::One`] (which have no precision
//! context) never degrade a computation they participate in.

use std::fmt;
use std::ops::{Div, Neg, Sub};

use num_traits::{One, Zero};

/// Error produced when a decimal literal cannot be parsed as a scalar.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid numeric literal `{0}`")]
pub struct ParseScalarError(pub String);

/// The numeric interface required by the polynomial engine, the kinematics
/// layer and the cusp pipeline.
///
/// By-value operator bounds exist so that `num_traits::Zero`/`One` apply and
/// generic code can use ordinary operator syntax; the `*_ref` methods are the
/// primary arithmetic entry points and avoid cloning heap-allocated mantissas.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Binary precision carried by this value, in mantissa bits.
    fn precision_bits(&self) -> u32;

    /// This value rounded to `bits` of precision.
    fn with_precision(&self, bits: u32) -> Self;

    /// Conversion from a double at the given precision.
    fn from_f64(v: f64, bits: u32) -> Self;

    /// Exact conversion from a (possibly large) integer.
    fn from_i64(v: i64, bits: u32) -> Self;

    /// Parse a decimal literal (`-12.75e-3` style) at full precision.
    ///
    /// This is the only faithful way to bring decimal input into a
    /// high-precision computation: routing a literal through `f64` first
    /// would bake its 53-bit rounding error into every digit beyond ~16.
    fn parse_decimal(text: &str, bits: u32) -> Result<Self, ParseScalarError>;

    /// Nearest double (used only at output boundaries, never inside math).
    fn to_f64(&self) -> f64;

    /// The circle constant at the given precision.
    fn pi(bits: u32) -> Self;

    fn is_finite(&self) -> bool;

    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn div_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn atan(&self) -> Self;
    fn acos(&self) -> Self;

    /// Two-argument arctangent; `self` is the ordinate, `x` the abscissa.
    fn atan2(&self, x: &Self) -> Self;

    /// Integer power by binary exponentiation.
    fn powi(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    /// `10^e` at the given precision; the building block of tolerance ladders.
    fn exp10(e: i32, bits: u32) -> Self {
        Self::parse_decimal(&format!("1e{e}"), bits).expect("power-of-ten literal always parses")
    }

    fn max_ref(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    fn min_ref(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    /// Sign as an integer: -1, 0 or +1.
    fn signum_i(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }

    /// Convenience for `self * 2`.
    fn double(&self) -> Self {
        self.add_ref(self)
    }

    /// Convenience for `self / 2`.
    fn halve(&self) -> Self {
        let two = Self::from_i64(2, self.precision_bits());
        self.div_ref(&two)
    }
}

macro_rules! impl_scalar_for_float {
    ($t:ty, $bits:expr, $pi:expr) => {
        impl Scalar for $t {
            fn precision_bits(&self) -> u32 {
                $bits
            }
            fn with_precision(&self, _bits: u32) -> Self {
                *self
            }
            fn from_f64(v: f64, _bits: u32) -> Self {
                v as $t
            }
            fn from_i64(v: i64, _bits: u32) -> Self {
                v as $t
            }
            fn parse_decimal(text: &str, _bits: u32) -> Result<Self, ParseScalarError> {
                text.parse::<$t>()
                    .map_err(|_| ParseScalarError(text.to_string()))
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn pi(_bits: u32) -> Self {
                $pi
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn add_ref(&self, rhs: &Self) -> Self {
                self + rhs
            }
            fn sub_ref(&self, rhs: &Self) -> Self {
                self - rhs
            }
            fn mul_ref(&self, rhs: &Self) -> Self {
                self * rhs
            }
            fn div_ref(&self, rhs: &Self) -> Self {
                self / rhs
            }
            fn neg_ref(&self) -> Self {
                -self
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn tan(&self) -> Self {
                <$t>::tan(*self)
            }
            fn atan(&self) -> Self {
                <$t>::atan(*self)
            }
            fn acos(&self) -> Self {
                <$t>::acos(*self)
            }
            fn atan2(&self, x: &Self) -> Self {
                <$t>::atan2(*self, *x)
            }
        }
    };
}

impl_scalar_for_float!(f32, 24, std::f32::consts::PI);
impl_scalar_for_float!(f64, 53, std::f64::consts::PI);

/// Binary precision equivalent to `digits` decimal digits:
/// `ceil(digits * log2(10))` plus one guard bit (which lands the 90-digit
/// default on a round 300 bits).
pub fn digits_to_bits(digits: u32) -> u32 {
    // 3.321928095 over-approximates log2(10) = 3.32192809488..., so the
    // ceiling never comes out short.
    ((digits as u64 * 3_321_928_095).div_ceil(1_000_000_000)) as u32 + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_to_bits_matches_log2_ten() {
        assert_eq!(digits_to_bits(90), 300);
        for d in [1u32, 30, 45, 90, 120, 500] {
            let bits = digits_to_bits(d) as f64;
            let exact = d as f64 * 10f64.log2();
            assert!(bits >= exact.ceil(), "{d} digits -> {bits} bits < {exact}");
            assert!(bits <= exact.ceil() + 2.0);
        }
    }

    #[test]
    fn f64_round_trip() {
        let x = f64::parse_decimal("-12.75e-3", 53).unwrap();
        assert_eq!(x, -0.01275);
        assert_eq!(x.signum_i(), -1);
        assert_eq!(f64::exp10(-6, 53), 1e-6);
        assert_eq!(2.0f64.powi(10), 1024.0);
    }
}
