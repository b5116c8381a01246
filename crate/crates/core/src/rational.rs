//! Exact rational numbers used for ratios, utilities and raw scores.
//!
//! Values serialize as strings (`"2/3"`, `"20"`) so logs and score reports
//! are byte-stable across platforms. Parsing additionally accepts decimal
//! notation (`"0.6"`), percentages (`"60%"`) and bare JSON/TOML numbers.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Panics if `denom` is zero.
    pub fn new(numer: i128, denom: i128) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_int(value: i128) -> Self {
        Rational(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> i128 {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> i128 {
        self.0.ceil().to_integer()
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn clamp(self, lo: Self, hi: Self) -> Self {
        self.max(lo).min(hi)
    }

    /// Nearest multiple of `1 / denom`, ties away from zero.
    pub fn round_to(&self, denom: i128) -> Self {
        Rational(Ratio::new((self.0 * Ratio::from_integer(denom)).round().to_integer(), denom))
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Decimal rendering rounded half away from zero to `places` digits.
    pub fn to_decimal_string(&self, places: u32) -> String {
        let scale = 10i128.pow(places);
        let scaled = self.0 * Ratio::from_integer(scale);
        let rounded = scaled.round().to_integer();
        let sign = if rounded < 0 { "-" } else { "" };
        let rounded = rounded.abs();
        if places == 0 {
            return format!("{sign}{rounded}");
        }
        let int = rounded / scale;
        let frac = rounded % scale;
        format!("{sign}{int}.{frac:0width$}", width = places as usize)
    }

    /// Integers print bare, everything else with two decimals.
    pub fn to_display_number(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            self.to_decimal_string(2)
        }
    }

    /// Percentage text such as `60%` or `37.5%`.
    pub fn to_percent_string(&self) -> String {
        let pct = *self * Rational::from_int(100);
        if pct.is_integer() {
            format!("{}%", pct.numer())
        } else {
            let s = pct.to_decimal_string(2);
            let s = s.trim_end_matches('0').trim_end_matches('.');
            format!("{s}%")
        }
    }

    fn parse_decimal(s: &str) -> Option<Rational> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
        let scale_exp = exp - frac_part.len() as i32;
        if scale_exp.unsigned_abs() > 30 {
            return None;
        }
        let pow = 10i128.checked_pow(scale_exp.unsigned_abs())?;
        let value = if scale_exp >= 0 {
            Rational::from_int(numer.checked_mul(pow)?)
        } else {
            Rational::new(numer, pow)
        };
        Some(if neg { -value } else { value })
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some(pct) = t.strip_suffix('%') {
            let v = Rational::parse_decimal(pct.trim()).ok_or_else(err)?;
            return Ok(v / Rational::from_int(100));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = Rational::parse_decimal(n.trim()).ok_or_else(err)?;
            let d = Rational::parse_decimal(d.trim()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(n / d);
        }
        Rational::parse_decimal(t).ok_or_else(err)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v as i128)
    }
}

impl From<u32> for Rational {
    fn from(v: u32) -> Self {
        Rational::from_int(v as i128)
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational::from_int(v as i128)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::from_int(v as i128)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        *self == Rational::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Rational::from(*other)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational number as a string (\"2/3\", \"0.6\", \"60%\") or a number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::from(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        // Shortest round-trip text, so 0.6 becomes exactly 3/5.
        format!("{v}").parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_all_notations() {
        assert_eq!(r("2/3"), Rational::new(2, 3));
        assert_eq!(r("0.6"), Rational::new(3, 5));
        assert_eq!(r("60%"), Rational::new(3, 5));
        assert_eq!(r("-1.5"), Rational::new(-3, 2));
        assert_eq!(r("1e2"), Rational::from_int(100));
        assert_eq!(r(" 4 "), Rational::from_int(4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn decimal_rendering_rounds_half_away() {
        assert_eq!(Rational::new(100, 3).to_decimal_string(2), "33.33");
        assert_eq!(Rational::new(2, 3).to_decimal_string(2), "0.67");
        assert_eq!(Rational::new(-1, 8).to_decimal_string(2), "-0.13");
        assert_eq!(Rational::new(967, 12).to_decimal_string(1), "80.6");
        assert_eq!(Rational::new(3, 5).to_percent_string(), "60%");
        assert_eq!(Rational::new(3, 8).to_percent_string(), "37.5%");
    }

    #[test]
    fn serde_uses_canonical_strings() {
        let v = Rational::new(4, 6);
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"2/3\"");
        let back: Rational = serde_json::from_str("\"2/3\"").unwrap();
        assert_eq!(back, v);
        let f: Rational = serde_json::from_str("0.6").unwrap();
        assert_eq!(f, Rational::new(3, 5));
        let i: Rational = serde_json::from_str("7").unwrap();
        assert_eq!(i, Rational::from_int(7));
    }
}
