//! Exact rational helpers: `num/den` text form and decimal rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub const DEFAULT_DIGITS: usize = 10;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `1 / 2^e`.
pub fn inv_pow2(e: u64) -> Rational {
    Rational::new_raw(BigInt::one(), BigInt::one() << e)
}

/// `"num/den"`; the denominator is written even when it is 1.
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_fraction(s: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `digits` places after the point, rounded half away from zero.
pub fn to_decimal_string(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut q = q;
    if rem * 2 >= *scaled.denom() {
        q += 1;
    }
    let (int_part, frac_part) = q.div_rem(&scale);
    let sign = if r.is_negative() && !q.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{frac_part:0>digits$}")
}

/// Serde adapter for `Rational` fields as `"num/den"` strings.
pub mod fraction_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_fraction_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_fraction(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_text() {
        assert_eq!(to_fraction_string(&ratio(576, 7154)), "288/3577");
        assert_eq!(to_fraction_string(&int(1)), "1/1");
        assert_eq!(parse_fraction("288/3577").unwrap(), ratio(288, 3577));
        assert_eq!(parse_fraction("-2/4").unwrap(), ratio(-1, 2));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("x/2").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal_string(&ratio(69, 3577), 7), "0.0192899");
        assert_eq!(to_decimal_string(&ratio(288, 3577), 7), "0.0805144");
        assert_eq!(to_decimal_string(&ratio(3321, 117211136), 10), "0.0000283335");
        assert_eq!(to_decimal_string(&ratio(1, 2), 0), "1");
        assert_eq!(to_decimal_string(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(to_decimal_string(&ratio(-1, 3000), 2), "0.00");
        assert_eq!(to_decimal_string(&ratio(999, 1000), 2), "1.00");
    }
}
