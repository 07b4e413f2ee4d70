//! Exact decimal literals.
//!
//! Numeric literals in dependency documents are kept as `digits * 10^-scale`
//! with no binary rounding, so `p < 176.89` compares exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact decimal number. Always normalized: no trailing fractional zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decimal {
    digits: BigInt,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal `{0}`")]
pub struct DecimalParseError(pub String);

impl Decimal {
    pub fn new(digits: BigInt, scale: u32) -> Self {
        let mut d = Decimal { digits, scale };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Decimal::from(0i64)
    }

    fn normalize(&mut self) {
        let ten = BigInt::from(10);
        while self.scale > 0 && (&self.digits % &ten).is_zero() {
            self.digits /= &ten;
            self.scale -= 1;
        }
        if self.digits.is_zero() {
            self.scale = 0;
        }
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    /// The value as an `i64` when it is integral and fits.
    pub fn to_i64(&self) -> Option<i64> {
        if self.scale == 0 {
            self.digits.to_i64()
        } else {
            None
        }
    }

    pub fn to_rational(&self) -> BigRational {
        let den = num::pow(BigInt::from(10), self.scale as usize);
        BigRational::new(self.digits.clone(), den)
    }

    /// Largest integer not above the value, saturated to `i64`.
    pub fn floor_i64(&self) -> i64 {
        saturate(&self.to_rational().floor().to_integer())
    }

    /// Smallest integer not below the value, saturated to `i64`.
    pub fn ceil_i64(&self) -> i64 {
        saturate(&self.to_rational().ceil().to_integer())
    }

    pub fn is_negative(&self) -> bool {
        self.digits.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

fn saturate(v: &BigInt) -> i64 {
    v.to_i64()
        .unwrap_or(if v.is_negative() { i64::MIN } else { i64::MAX })
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal {
            digits: BigInt::from(v),
            scale: 0,
        }
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DecimalParseError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || (body.contains('.') && frac_part.is_empty())
        {
            return Err(err());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut digits: BigInt = joined.parse().map_err(|_| err())?;
        if neg {
            digits = -digits;
        }
        Ok(Decimal::new(digits, frac_part.len() as u32))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.digits);
        }
        let abs = self.digits.abs().to_string();
        let scale = self.scale as usize;
        let padded = if abs.len() <= scale {
            format!("{}{}", "0".repeat(scale - abs.len() + 1), abs)
        } else {
            abs
        };
        let (i, frac) = padded.split_at(padded.len() - scale);
        let sign = if self.digits.is_negative() { "-" } else { "" };
        write!(f, "{sign}{i}.{frac}")
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_rational().cmp(&other.to_rational())
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        // Integral values serialize as numbers, fractional ones as exact strings.
        match self.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s,
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected a number, got {other}"
                )))
            }
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Rationals used by arithmetic evaluation.
pub(crate) fn rational_from_i64(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}
