//! Exact coefficient field.
//!
//! Coefficients are [`num_rational::BigRational`], which keeps every value in
//! lowest terms with a positive denominator. The helpers here cover the string
//! form used in every JSON document (`"p/q"` or `"p"`).

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::str::FromStr;

pub type Rational = num_rational::BigRational;

/// `p / q` as an exact rational. Panics when `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> BigInt {
    (2..=n as u64).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn to_text(r: &Rational) -> String {
    r.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"p"` or `"p/q"` (optional leading sign on `p`), reducing to lowest terms.
pub fn parse_text(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let digits_ok = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let unsigned = num.strip_prefix('-').unwrap_or(num);
    if !digits_ok(unsigned) || !digits_ok(den) {
        return Err(err());
    }
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

pub(crate) mod serde_text {
    use super::{parse_text, to_text, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_text(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_lowest_terms() {
        assert_eq!(to_text(&rat(6, 4)), "3/2");
        assert_eq!(to_text(&rat(-6, 3)), "-2");
        assert_eq!(to_text(&rat(0, 5)), "0");
        assert_eq!(to_text(&rat(3, -4)), "-3/4");
    }

    #[test]
    fn parse_accepts_integer_and_fraction() {
        assert_eq!(parse_text("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_text("-7").unwrap(), int(-7));
        assert_eq!(parse_text("10/4").unwrap(), rat(5, 2));
        assert!(parse_text("1/0").is_err());
        assert!(parse_text("1.5").is_err());
        assert!(parse_text("").is_err());
        assert!(parse_text("+3").is_err());
    }

    #[test]
    fn combinatorics() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(3, 5), BigInt::from(0));
    }
}
