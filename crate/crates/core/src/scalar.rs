//! Numeric backends shared by the float and exact-rational code paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::distributions::Discrete;
use crate::error::{Error, Result};
use crate::exact::sweep::{sweep_generic, sweep_rational};
use crate::exact::OrderStats;

/// A field element used for probabilities and values.
///
/// Implemented for `f64` and `BigRational`, so the same distribution and
/// evaluation code runs in either mode.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Signed {
    /// Exact conversion from a finite float (rationals) or identity (floats).
    fn from_f64_exact(x: f64) -> Option<Self>;
    fn to_float(&self) -> f64;
    fn from_u64(x: u64) -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// `E[max]` and `E[smax]` of independent variables.
    fn order_stats(vars: &[&Discrete<Self>]) -> OrderStats<Self> {
        sweep_generic(vars)
    }
}

impl Scalar for f64 {
    fn from_f64_exact(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn from_u64(x: u64) -> Self {
        x as f64
    }
}

impl Scalar for BigRational {
    fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_float(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_u64(x: u64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }

    fn order_stats(vars: &[&Discrete<Self>]) -> OrderStats<Self> {
        sweep_rational(vars)
    }
}

/// Converts a rational to the nearest-ish float without overflowing on
/// huge numerators and denominators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(f) = ToPrimitive::to_f64(r) {
        if f.is_finite() && (f != 0.0 || r.is_zero()) {
            return f;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // Scale so the quotient has about 64 significant bits.
    let (nn, dd) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let q = (nn << 64usize) / dd;
    let qf = ToPrimitive::to_f64(&q).unwrap_or(f64::NAN);
    qf * 2f64.powi((shift - 64) as i32)
}

/// Parses `"3"`, `"-3/4"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n = BigInt::from_str_radix(a.trim(), 10).map_err(|_| bad())?;
        let d = BigInt::from_str_radix(b.trim(), 10).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&digits, 10).map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Formats a rational as `"n"` or `"n/d"` with decimal integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational from a float; panics only on non-finite input, which the
/// distribution constructors already reject.
pub(crate) fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}
