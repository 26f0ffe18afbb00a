//! Certificates: versioned, deterministic JSON records of checks.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::exactnum::{fmt_rational, Rational};

/// Schema tag embedded in every certificate.
pub const SCHEMA: &str = "trc-1";

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unchecked,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(default)]
    pub detail: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, detail: Value) -> Self {
        Check { name: name.into(), status, detail }
    }

    pub fn from_bool(name: impl Into<String>, ok: bool, detail: Value) -> Self {
        Check::new(name, Status::from_bool(ok), detail)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Certificate {
    pub schema: String,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub first_failure: Option<Value>,
    pub pass: bool,
    #[serde(default)]
    pub data: Value,
}

impl Certificate {
    pub fn new(command: impl Into<String>, inputs: Value, seed: Option<u64>) -> Self {
        Certificate {
            schema: SCHEMA.to_string(),
            command: command.into(),
            seed,
            inputs,
            checks: Vec::new(),
            first_failure: None,
            pass: true,
            data: Value::Null,
        }
    }

    pub fn push(&mut self, check: Check) {
        if check.status == Status::Fail {
            self.pass = false;
            if self.first_failure.is_none() {
                self.first_failure = Some(json!({ "check": check.name, "detail": check.detail }));
            }
        }
        self.checks.push(check);
    }

    /// Appends every check of `other`, prefixing names with `prefix/`.
    pub fn absorb(&mut self, prefix: &str, other: &Certificate) {
        for c in &other.checks {
            self.push(Check { name: format!("{prefix}/{}", c.name), ..c.clone() });
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Integer as an exact JSON string.
pub fn int_json(x: &BigInt) -> Value {
    Value::String(x.to_string())
}

/// Rational as an exact JSON string `p` or `p/q`.
pub fn rat_json(x: &Rational) -> Value {
    Value::String(fmt_rational(x))
}

pub fn ints_json(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(int_json).collect())
}

pub fn rats_json(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(rat_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_and_round_trip() {
        let mut c = Certificate::new("demo", json!({"n": 1}), Some(7));
        c.push(Check::from_bool("a", true, Value::Null));
        c.push(Check::new("b", Status::Unchecked, json!("why")));
        assert!(c.pass);
        c.push(Check::from_bool("c", false, json!({"r": 1})));
        c.push(Check::from_bool("d", false, Value::Null));
        assert!(!c.pass);
        assert_eq!(c.first_failure.as_ref().unwrap()["check"], "c");
        let back = Certificate::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
    }
}
