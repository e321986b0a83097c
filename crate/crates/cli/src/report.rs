//! JSON envelope and value encoders.

use affsieve_core::IntMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Finite floats rounded to 12 significant digits; others become `null`.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    json!(rounded)
}

/// Text form of a float with the same rounding, for CSV cells.
pub fn float_text(x: f64) -> String {
    match float(x) {
        Value::Null => String::new(),
        v => v.to_string(),
    }
}

pub fn bigint(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

pub fn int128(v: i128) -> Value {
    bigint(&BigInt::from(v))
}

pub fn rational(r: &BigRational) -> Value {
    json!({"num": bigint(r.numer()), "den": bigint(r.denom())})
}

pub fn matrix(x: &IntMatrix) -> Value {
    json!(x.rows())
}

pub fn envelope(cfg: &RunConfig, result: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "command": cfg.command,
        "config": cfg,
        "result": result,
    })
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(float(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(float(2.0), json!(2.0));
        assert_eq!(float(f64::INFINITY), Value::Null);
        assert_eq!(float_text(1234567.891234567), "1234567.89123");
    }

    #[test]
    fn big_values_become_strings() {
        let big = BigInt::from(1u128 << 100);
        assert_eq!(bigint(&big), json!(big.to_string()));
        let r = BigRational::new(BigInt::from(6), BigInt::from(4));
        assert_eq!(rational(&r), json!({"num": 3, "den": 2}));
    }
}
