//! Exact rational helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// `0 < p < 1`.
pub fn is_open_probability(p: &Rational) -> bool {
    p.is_positive() && *p < Rational::one()
}

/// `0 <= p <= 1`.
pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

pub fn complement(p: &Rational) -> Rational {
    Rational::one() - p
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// Parses `a/b` with unsigned decimal integers `a` and `b > 0`.
///
/// Bare integers and decimal points are rejected: inputs must state the
/// fraction they mean.
pub fn parse_fraction(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("expected a fraction a/b, got {text:?}"));
    let (numer, denom) = text.split_once('/').ok_or_else(bad)?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(numer) || !digits(denom) {
        return Err(bad());
    }
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "zero denominator in {text:?}"
        )));
    }
    Ok(Rational::new(numer, denom))
}

/// Converts a decimal literal such as `0.4278` into the fraction with
/// denominator `10^places`. The literal may not carry more than `places`
/// fractional digits.
pub fn from_decimal(text: &str, places: u32) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("expected a decimal literal, got {text:?}"));
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if whole.is_empty() && frac.is_empty() || !digits(whole) || !digits(frac) {
        return Err(bad());
    }
    if frac.len() > places as usize {
        return Err(Error::InvalidArgument(format!(
            "{text} has more than {places} fractional digits"
        )));
    }
    let padded = format!("{whole}{frac:0<width$}", width = places as usize);
    let numer: BigInt = padded.parse().map_err(|_| bad())?;
    Ok(Rational::new(numer, BigInt::from(10).pow(places)))
}

/// Decimal rendering rounded half away from zero to `digits` places.
pub fn to_decimal(value: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10).pow(digits);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let rounded = (scaled + ratio(1, 2)).floor().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if value.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>width$}", width = digits as usize)
    }
}

/// Lossy conversion for reports and growth fits.
pub fn to_f64(value: &Rational) -> f64 {
    to_decimal(value, 17).parse().unwrap_or(f64::NAN)
}

/// Smallest `w >= 1` with `p * q^w` integral, searching up to `cap`.
pub(crate) fn q_adic_exponent(p: &Rational, q: u64, cap: u32) -> Option<u32> {
    let q = BigInt::from(q);
    let denom = p.denom();
    let mut power = q.clone();
    for w in 1..=cap {
        if (&power % denom).is_zero() {
            return Some(w);
        }
        power *= &q;
    }
    None
}
