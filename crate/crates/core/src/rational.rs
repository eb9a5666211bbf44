//! Exact rational numbers and their text forms.
//!
//! Text forms accepted by [`parse_rational`]:
//! * integers, `"3"`, `"-2"`
//! * fractions, `"3/4"`, `"-6/8"` (reduced on parse)
//! * finite decimals, `"0.6"`, `"-.25"`, `"1."`; read exactly as a fraction
//!   over a power of ten, never through a float.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses one rational literal. Errors carry the offending literal.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::parse("rational", "empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_integer(num.trim(), s)?;
        let den = parse_integer(den.trim(), s)?;
        if den.is_zero() {
            return Err(Error::parse("rational", format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if s.contains('.') {
        return parse_decimal(s);
    }
    Ok(Rational::from_integer(parse_integer(s, s)?))
}

fn parse_integer(digits: &str, whole: &str) -> Result<BigInt> {
    let (neg, body) = split_sign(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse("rational", format!("invalid number {whole:?}")));
    }
    let v: BigInt = body
        .parse()
        .map_err(|_| Error::parse("rational", format!("invalid number {whole:?}")))?;
    Ok(if neg { -v } else { v })
}

fn split_sign(s: &str) -> (bool, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (false, rest)
    } else {
        (false, s)
    }
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let (neg, body) = split_sign(s);
    let (whole, frac) = body.split_once('.').expect("caller checked for '.'");
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !digits_ok(whole) || !digits_ok(frac) {
        return Err(Error::parse("rational", format!("invalid decimal {s:?}")));
    }
    let mut all = String::with_capacity(whole.len() + frac.len());
    all.push_str(whole);
    all.push_str(frac);
    let num: BigInt = all.parse().unwrap_or_else(|_| BigInt::zero());
    let den = num_traits::pow(BigInt::from(10u32), frac.len());
    let v = Rational::new(num, den);
    Ok(if neg { -v } else { v })
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Lossy conversion for display columns and learners.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Numerator or denominator outside f64 range: scale both down.
        let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}
