//! Exact dense linear algebra and univariate polynomials over the rationals.

mod matrix;
mod upoly;

pub use matrix::QMatrix;
pub use upoly::UPoly;

use num::{BigInt, BigRational, ToPrimitive};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational from a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// Parses `"p/q"` or an integer string.
pub fn parse_q(s: &str) -> crate::Result<Q> {
    let q: Q = s.trim().parse().map_err(|_| crate::Error::Parse(format!("bad rational {s:?}")))?;
    Ok(q)
}

/// Rational from a JSON string (`"p/q"`) or integer.
pub fn q_from_json(v: &serde_json::Value) -> crate::Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => n.as_i64().map(q).ok_or_else(|| crate::Error::Parse(format!("non-integer number {n}; use \"p/q\""))),
        _ => Err(crate::Error::Parse("rational expected".into())),
    }
}
