//! Rational helpers shared by the exact code paths.
//!
//! Every value that feeds a zero test (resonance, Diophantine zero pairs,
//! secular terms) is a [`Q`]. Floats appear only at the reporting boundary.

use crate::error::{Error, Result};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A parsed real-valued input together with whether it was written as an
/// exact fraction (`p/q` or an integer) or as a decimal approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedReal {
    pub value: Q,
    pub exact: bool,
}

/// Parses `p/q` or a plain integer. Decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad(s))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad(s))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(Q::new(p, q));
    }
    let n: BigInt = t.parse().map_err(|_| {
        Error::Parse(format!("'{s}' is not of the form p/q (decimals are not exact here)"))
    })?;
    Ok(Q::from_integer(n))
}

/// Parses a decimal literal such as `-1.6180339887...` or `2.5e-3` into the
/// rational number it denotes exactly.
pub fn parse_decimal(s: &str) -> Result<Q> {
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad(s))?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad(s));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad(s));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad(s))? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        Q::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Accepts either form; `exact` records which one was used.
pub fn parse_real(s: &str) -> Result<ParsedReal> {
    match parse_rational(s) {
        Ok(value) => Ok(ParsedReal { value, exact: true }),
        Err(_) => Ok(ParsedReal { value: parse_decimal(s)?, exact: false }),
    }
}

fn bad(s: &str) -> Error {
    Error::Parse(format!("cannot parse '{s}' as a number"))
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite value {x}")))
}

pub fn to_f64(x: &Q) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v,
        _ => {
            let s = if x.is_negative() { -1.0 } else { 1.0 };
            s * ln_abs(x).exp()
        }
    }
}

/// Natural log of a nonzero big integer's magnitude; safe for any size.
pub fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln |x|` for nonzero rational `x`.
pub fn ln_abs(x: &Q) -> f64 {
    ln_big(x.numer()) - ln_big(x.denom())
}

/// `num / den` as a double without intermediate overflow.
pub fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let sign = if (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus) { -1.0 } else { 1.0 };
    match (num.abs().to_f64(), den.abs().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => {
            let r = a / b;
            if r.is_finite() && r != 0.0 {
                return sign * r;
            }
            sign * (ln_big(num) - ln_big(den)).exp()
        }
        _ => sign * (ln_big(num) - ln_big(den)).exp(),
    }
}

pub fn floor(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Q) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// The paper's `[[y]]`: nearest integer, with exact half-integers sent to the
/// nearest even integer.
pub fn round_half_even(x: &Q) -> BigInt {
    let f = floor(x);
    let frac = x - Q::from_integer(f.clone());
    let half = qr(1, 2);
    if frac < half {
        f
    } else if frac > half {
        f + 1
    } else if f.is_even() {
        f
    } else {
        f + 1
    }
}

/// `min_k |x - k|`.
pub fn nearest_integer_distance(x: &Q) -> Q {
    let f = Q::from_integer(floor(x));
    let lo = x - &f;
    let hi = Q::one() - &lo;
    if lo <= hi { lo } else { hi }
}

/// Exact square root when `x` is the square of a rational.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// `floor(sqrt(x) * 2^bits) / 2^bits`; the error is below `2^-bits`.
pub fn sqrt_fixed(x: &Q, bits: u32) -> Result<Q> {
    if x.is_negative() {
        return Err(Error::Domain("square root of a negative number".into()));
    }
    let scaled = (x.numer() << (2 * bits as usize)) / x.denom();
    Ok(Q::new(scaled.sqrt(), BigInt::one() << bits as usize))
}

/// Truncates `x` to a dyadic rational with `bits` fractional bits.
pub fn truncate_fixed(x: &Q, bits: u32) -> Q {
    let scaled = floor(&(x * Q::from_integer(BigInt::one() << bits as usize)));
    Q::new(scaled, BigInt::one() << bits as usize)
}

/// Integer if `x` is one.
pub fn as_integer(x: &Q) -> Option<BigInt> {
    x.is_integer().then(|| x.numer().clone())
}

pub fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Numerical(format!("integer {x} exceeds 64 bits")))
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Formats a double with 17 significant digits (`%.17g` style).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..17).contains(&e) {
        let decimals = (16 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.16e}");
        let (m, ex) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim_zeros(m), ex)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub mod serde_q {
    //! Serialises rationals as `"p/q"` strings.
    use super::{format_q, parse_rational, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_examples() {
        let r = |n, d| round_half_even(&qr(n, d));
        assert_eq!(r(5, 2), BigInt::from(2));
        assert_eq!(r(7, 2), BigInt::from(4));
        assert_eq!(r(21, 10), BigInt::from(2));
        assert_eq!(r(29, 10), BigInt::from(3));
        assert_eq!(r(-5, 2), BigInt::from(-2));
        assert_eq!(r(-3, 2), BigInt::from(-2));
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(parse_decimal("1.25").unwrap(), qr(5, 4));
        assert_eq!(parse_decimal("-0.5e1").unwrap(), qi(-5));
        assert_eq!(parse_decimal(".5").unwrap(), qr(1, 2));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_rational("0.5").is_err());
        assert_eq!(parse_rational(" -6/4 ").unwrap(), qr(-3, 2));
        assert!(!parse_real("0.5").unwrap().exact);
        assert!(parse_real("1/2").unwrap().exact);
    }

    #[test]
    fn nearest_integer_distance_examples() {
        assert_eq!(nearest_integer_distance(&qr(1, 2)), qr(1, 2));
        assert_eq!(nearest_integer_distance(&qi(3)), qi(0));
        assert_eq!(nearest_integer_distance(&qr(-7, 4)), qr(1, 4));
    }

    #[test]
    fn square_roots() {
        assert_eq!(rational_sqrt(&qr(9, 4)), Some(qr(3, 2)));
        assert_eq!(rational_sqrt(&qi(3)), None);
        let r = sqrt_fixed(&qi(2), 200).unwrap();
        let err = to_f64(&(&r * &r - qi(2)));
        assert!(err.abs() < 1e-59);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(5.0), "5");
        assert_eq!(fmt_f64(-270.0), "-270");
        assert_eq!(fmt_f64(1e-9), "1.0000000000000001e-9");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -2.5e-7] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ratio_handles_huge_operands() {
        let big = BigInt::one() << 3000usize;
        let v = ratio_f64(&(&big * 3), &big);
        assert!((v - 3.0).abs() < 1e-12);
    }
}
