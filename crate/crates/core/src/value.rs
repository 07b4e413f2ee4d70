//! Concrete parameter values shared by requests and CSP assignments.

use std::cmp::Ordering;
use std::fmt;

use num::rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::decimal::{rational_from_i64, Decimal};
use crate::idl::RelOp;

/// The derived `Ord` is structural (used for sets and canonical ordering);
/// semantic comparison goes through [`Value::compare`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Num(Decimal),
    Str(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    /// `Int` when the decimal is an integer that fits, `Num` otherwise.
    pub fn from_decimal(d: &Decimal) -> Self {
        match d.to_i64() {
            Some(i) => Value::Int(i),
            None => Value::Num(d.clone()),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Int(i) => Some(rational_from_i64(*i)),
            Value::Num(d) => Some(d.to_rational()),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Num(_))
    }

    /// Semantic equality: numbers compare by value across `Int`/`Num`,
    /// everything else only within its own kind.
    pub fn sem_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (a, b) if a.is_numeric() && b.is_numeric() => a.as_rational() == b.as_rational(),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            _ => false,
        }
    }

    /// Ordering for `<`, `>`, `<=`, `>=`: numbers numerically, strings
    /// lexicographically. Booleans and mixed kinds are unordered.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (a, b) if a.is_numeric() && b.is_numeric() => {
                Some(a.as_rational()?.cmp(&b.as_rational()?))
            }
            (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// `self op other`. Unordered pairs satisfy only `!=`.
    pub fn satisfies(&self, op: RelOp, other: &Value) -> bool {
        match op {
            RelOp::Eq => self.sem_eq(other),
            RelOp::Ne => !self.sem_eq(other),
            _ => self.compare(other).is_some_and(|o| op.holds(o)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Num(d) => write!(f, "{d}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}
