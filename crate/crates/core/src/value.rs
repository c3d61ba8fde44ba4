//! Untyped data values and the Tcl-style coercions applied to them.
//!
//! CDL treats every value as a character string. Arithmetic and comparison
//! operators reinterpret strings as numbers when they look like numbers,
//! mirroring Tcl's `expr`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A CDL value: an arbitrary character string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DataValue(String);

impl DataValue {
    pub fn new(s: impl Into<String>) -> Self {
        DataValue(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `"1"` or `"0"`.
    pub fn from_bool(b: bool) -> Self {
        DataValue(if b { "1" } else { "0" }.to_string())
    }

    pub fn zero() -> Self {
        DataValue("0".to_string())
    }

    pub fn one() -> Self {
        DataValue("1".to_string())
    }

    pub fn number(&self) -> Option<Number> {
        parse_number(&self.0)
    }

    pub fn truthy(&self) -> bool {
        to_bool(self)
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DataValue {
    fn from(s: &str) -> Self {
        DataValue(s.to_string())
    }
}

impl From<String> for DataValue {
    fn from(s: String) -> Self {
        DataValue(s)
    }
}

impl From<i64> for DataValue {
    fn from(n: i64) -> Self {
        DataValue(n.to_string())
    }
}

impl From<Number> for DataValue {
    fn from(n: Number) -> Self {
        DataValue(n.render())
    }
}

/// A string reinterpreted as a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Int(i) => i == 0,
            Number::Float(x) => x == 0.0,
        }
    }

    /// Canonical rendering: integers in decimal, floats in shortest
    /// round-trip form with a trailing `.0` when integral.
    pub fn render(self) -> String {
        match self {
            Number::Int(i) => i.to_string(),
            Number::Float(x) => format!("{x:?}"),
        }
    }

    pub fn compare(self, other: Number) -> Ordering {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(&b),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

/// Parses `s` as a number. Accepted forms, each with an optional sign:
/// decimal integers, `0x` hexadecimal integers, and decimal floats with an
/// optional exponent. Decimal integers outside the 64-bit range become
/// floats.
pub fn parse_number(s: &str) -> Option<Number> {
    let bytes = s.as_bytes();
    let (negative, body) = match bytes.first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let magnitude = i128::from_str_radix(hex, 16).ok()?;
        let value = if negative { -magnitude } else { magnitude };
        return i64::try_from(value).ok().map(Number::Int);
    }
    if body.bytes().all(|b| b.is_ascii_digit()) {
        return match s.parse::<i64>() {
            Ok(i) => Some(Number::Int(i)),
            Err(_) => s.parse::<f64>().ok().map(Number::Float),
        };
    }
    if is_float_literal(body) {
        return s.parse::<f64>().ok().map(Number::Float);
    }
    None
}

/// `digits [. digits] [exp]` or `. digits [exp]`, with at least one mantissa
/// digit and at least one of the fraction or exponent present.
fn is_float_literal(body: &str) -> bool {
    let b = body.as_bytes();
    let mut i = 0;
    let int_digits = count_digits(&b[i..]);
    i += int_digits;
    let mut frac_digits = 0;
    let mut has_dot = false;
    if i < b.len() && b[i] == b'.' {
        has_dot = true;
        i += 1;
        frac_digits = count_digits(&b[i..]);
        i += frac_digits;
    }
    if int_digits + frac_digits == 0 {
        return false;
    }
    let mut has_exp = false;
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_digits = count_digits(&b[i..]);
        if exp_digits == 0 {
            return false;
        }
        i += exp_digits;
        has_exp = true;
    }
    i == b.len() && (has_dot || has_exp)
}

fn count_digits(b: &[u8]) -> usize {
    b.iter().take_while(|c| c.is_ascii_digit()).count()
}

/// Tcl-style truth: false for the empty string and for any spelling of
/// numeric zero (`0`, `00`, `-0`, `0.0`, `0x0`, ...), true otherwise.
pub fn to_bool(v: &DataValue) -> bool {
    let s = v.as_str();
    if s.is_empty() {
        return false;
    }
    match parse_number(s) {
        Some(n) => !n.is_zero(),
        None => true,
    }
}

/// Ordering used by the comparison operators: numeric when both sides are
/// numbers, otherwise by code point.
pub fn compare_values(a: &DataValue, b: &DataValue) -> Ordering {
    match (a.number(), b.number()) {
        (Some(x), Some(y)) => x.compare(y),
        _ => a.as_str().cmp(b.as_str()),
    }
}

pub fn values_equal(a: &DataValue, b: &DataValue) -> bool {
    compare_values(a, b) == Ordering::Equal
}
