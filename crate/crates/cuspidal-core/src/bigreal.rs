//! Arbitrary-precision scalar backed by `astro-float`.
//!
//! [`BigReal`] wraps [`astro_float::BigFloat`] and implements [`Scalar`].
//! Each value knows its own mantissa width; binary operations produce results
//! at the wider of the two operand precisions. Transcendental functions share
//! a per-thread constants cache (the underlying library's `Consts` is not
//! thread-safe, and cloning it per call would recompute pi every time).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_traits::{One, Zero};

use crate::scalar::{ParseScalarError, Scalar};

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision assumed for values that carry none (NaN) and for the contextless
/// constants `zero()`/`one()`. Any arithmetic with a real operand immediately
/// promotes to that operand's precision.
const FALLBACK_BITS: usize = 128;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(
        Consts::new().expect("constants cache allocation"),
    );
}

/// Arbitrary-precision real number; see module docs.
#[derive(Clone, Debug)]
pub struct BigReal(BigFloat);

impl BigReal {
    fn prec(&self) -> usize {
        self.0.mantissa_max_bit_len().unwrap_or(FALLBACK_BITS)
    }

    fn prec2(&self, other: &Self) -> usize {
        self.prec().max(other.prec())
    }

    /// Access to the wrapped value (escape hatch for tests).
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for BigReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl Sub for BigReal {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl Mul for BigReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl Div for BigReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_ref(&rhs)
    }
}

impl Neg for BigReal {
    type Output = Self;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl Zero for BigReal {
    fn zero() -> Self {
        BigReal(BigFloat::from_f64(0.0, FALLBACK_BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for BigReal {
    fn one() -> Self {
        BigReal(BigFloat::from_f64(1.0, FALLBACK_BITS))
    }
}

/// Strict shape check for decimal literals: optional sign, digits with an
/// optional fractional part (at least one digit overall), optional exponent.
/// The underlying parser signals failure only by returning NaN, so validating
/// up front gives a real error for garbage like `"12..e"`.
fn literal_is_well_formed(text: &str) -> bool {
    let mut chars = text.chars().peekable();
    if matches!(chars.peek(), Some('+') | Some('-')) {
        chars.next();
    }
    let mut mantissa_digits = 0usize;
    while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
        chars.next();
        mantissa_digits += 1;
    }
    if chars.peek() == Some(&'.') {
        chars.next();
        while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
            chars.next();
            mantissa_digits += 1;
        }
    }
    if mantissa_digits == 0 {
        return false;
    }
    if matches!(chars.peek(), Some('e') | Some('E')) {
        chars.next();
        if matches!(chars.peek(), Some('+') | Some('-')) {
            chars.next();
        }
        let mut exp_digits = 0usize;
        while matches!(chars.peek(), Some(c) if c.is_ascii_digit()) {
            chars.next();
            exp_digits += 1;
        }
        if exp_digits == 0 {
            return false;
        }
    }
    chars.next().is_none()
}

impl Scalar for BigReal {
    fn precision_bits(&self) -> u32 {
        self.prec() as u32
    }

    fn with_precision(&self, bits: u32) -> Self {
        let p = (bits as usize).max(8);
        let zero = BigFloat::from_f64(0.0, p);
        BigReal(self.0.add(&zero, p, RM))
    }

    fn from_f64(v: f64, bits: u32) -> Self {
        BigReal(BigFloat::from_f64(v, (bits as usize).max(8)))
    }

    fn from_i64(v: i64, bits: u32) -> Self {
        if v.unsigned_abs() <= (1u64 << 53) {
            Self::from_f64(v as f64, bits)
        } else {
            Self::parse_decimal(&v.to_string(), bits).expect("integer literal always parses")
        }
    }

    fn parse_decimal(text: &str, bits: u32) -> Result<Self, ParseScalarError> {
        if !literal_is_well_formed(text) {
            return Err(ParseScalarError(text.to_string()));
        }
        let value = CONSTS.with(|cc| {
            BigFloat::parse(text, Radix::Dec, (bits as usize).max(8), RM, &mut cc.borrow_mut())
        });
        if value.is_nan() {
            return Err(ParseScalarError(text.to_string()));
        }
        Ok(BigReal(value))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        format!("{}", self.0).parse::<f64>().unwrap_or(f64::NAN)
    }

    fn pi(bits: u32) -> Self {
        CONSTS.with(|cc| BigReal(cc.borrow_mut().pi((bits as usize).max(8), RM)))
    }

    fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf_pos() || self.0.is_inf_neg())
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        BigReal(self.0.add(&rhs.0, self.prec2(rhs), RM))
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        BigReal(self.0.sub(&rhs.0, self.prec2(rhs), RM))
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        BigReal(self.0.mul(&rhs.0, self.prec2(rhs), RM))
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        BigReal(self.0.div(&rhs.0, self.prec2(rhs), RM))
    }

    fn neg_ref(&self) -> Self {
        BigReal(self.0.clone().neg())
    }

    fn abs(&self) -> Self {
        BigReal(self.0.abs())
    }

    fn sqrt(&self) -> Self {
        BigReal(self.0.sqrt(self.prec(), RM))
    }

    fn sin(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.sin(self.prec(), RM, &mut cc.borrow_mut())))
    }

    fn cos(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.cos(self.prec(), RM, &mut cc.borrow_mut())))
    }

    fn tan(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.tan(self.prec(), RM, &mut cc.borrow_mut())))
    }

    fn atan(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.atan(self.prec(), RM, &mut cc.borrow_mut())))
    }

    fn acos(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.acos(self.prec(), RM, &mut cc.borrow_mut())))
    }

    fn atan2(&self, x: &Self) -> Self {
        let p = self.prec2(x) as u32;
        let y = self;
        if x.is_zero() && y.is_zero() {
            return Self::from_f64(0.0, p);
        }
        if x.is_zero() {
            let half_pi = Self::pi(p).halve();
            return if y.is_negative() { half_pi.neg_ref() } else { half_pi };
        }
        let base = y.div_ref(x).atan();
        if !x.is_negative() {
            base
        } else if y.is_negative() {
            base.sub_ref(&Self::pi(p))
        } else {
            base.add_ref(&Self::pi(p))
        }
    }

    fn powi(&self, n: u32) -> Self {
        BigReal(self.0.powi(n as usize, self.prec(), RM))
    }
}
