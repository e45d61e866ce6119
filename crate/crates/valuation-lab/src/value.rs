//! The value carrier a + b·r where r is an element infinitely large over the
//! rationals: ordering is lexicographic with b dominating, so r exceeds every
//! rational multiple of 1. INFINITY (the value of 0) sits above everything.

use std::cmp::Ordering;

use crate::exact::rat::{fmt_rat, parse_rat, rat, rat_frac, Rat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Finite { a: Rat, b: Rat },
    Infinity,
}

impl Value {
    pub fn zero() -> Value {
        Value::Finite {
            a: rat(0),
            b: rat(0),
        }
    }

    pub fn from_rat(a: Rat) -> Value {
        Value::Finite { a, b: rat(0) }
    }

    pub fn from_parts(a: Rat, b: Rat) -> Value {
        Value::Finite { a, b }
    }

    pub fn from_i64(a: i64) -> Value {
        Value::from_rat(rat(a))
    }

    pub fn from_frac(n: i64, d: i64) -> Value {
        Value::from_rat(rat_frac(n, d))
    }

    /// The r-coefficient pair (a, b); None for INFINITY.
    pub fn parts(&self) -> Option<(&Rat, &Rat)> {
        match self {
            Value::Finite { a, b } => Some((a, b)),
            Value::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Finite { a, b } if a == &rat(0) && b == &rat(0))
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => Value::Finite {
                a: a + c,
                b: b + d,
            },
            _ => Value::Infinity,
        }
    }

    pub fn sub(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => Ok(Value::Finite {
                a: a - c,
                b: b - d,
            }),
            (Value::Infinity, Value::Finite { .. }) => Ok(Value::Infinity),
            _ => Err(Error::DomainMismatch(
                "cannot subtract an infinite value".into(),
            )),
        }
    }

    pub fn neg(&self) -> Result<Value> {
        match self {
            Value::Finite { a, b } => Ok(Value::Finite { a: -a, b: -b }),
            Value::Infinity => Err(Error::DomainMismatch(
                "cannot negate the infinite value".into(),
            )),
        }
    }

    /// Scale by an exact rational (multiplicity, 1/e normalizations).
    pub fn scale(&self, c: &Rat) -> Value {
        match self {
            Value::Finite { a, b } => Value::Finite { a: a * c, b: b * c },
            Value::Infinity => Value::Infinity,
        }
    }

    pub fn mul_int(&self, n: i64) -> Value {
        self.scale(&rat(n))
    }

    pub fn min(a: &Value, b: &Value) -> Value {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Infinity => serde_json::Value::String("inf".into()),
            Value::Finite { a, b } => serde_json::json!({
                "a": fmt_rat(a),
                "b": fmt_rat(b),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Value> {
        if v.as_str() == Some("inf") {
            return Ok(Value::Infinity);
        }
        let obj = v.as_object().ok_or_else(|| Error::ParseError {
            offset: 0,
            message: "value must be \"inf\" or {a, b}".into(),
        })?;
        let field = |name: &str| -> Result<Rat> {
            let s = obj.get(name).and_then(|x| x.as_str()).ok_or_else(|| {
                Error::ParseError {
                    offset: 0,
                    message: format!("value field {name:?} missing or not a string"),
                }
            })?;
            parse_rat(s)
        };
        Ok(Value::Finite {
            a: field("a")?,
            b: field("b")?,
        })
    }

    pub fn format(&self) -> String {
        match self {
            Value::Infinity => "inf".into(),
            Value::Finite { a, b } => {
                if b == &rat(0) {
                    fmt_rat(a)
                } else if a == &rat(0) {
                    format!("{}r", fmt_rat(b))
                } else {
                    format!("{} + {}r", fmt_rat(a), fmt_rat(b))
                }
            }
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Infinity, Value::Infinity) => Ordering::Equal,
            (Value::Infinity, _) => Ordering::Greater,
            (_, Value::Infinity) => Ordering::Less,
            (Value::Finite { a, b }, Value::Finite { a: c, b: d }) => {
                b.cmp(d).then_with(|| a.cmp(c))
            }
        }
    }
}
