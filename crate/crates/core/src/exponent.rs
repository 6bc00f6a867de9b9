//! Extended-real Lebesgue exponents.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[0, ∞]`, with infinity carried symbolically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// A Lebesgue exponent `q ∈ [1, ∞]`.
    pub fn lebesgue(q: f64) -> Result<Self> {
        if q.is_infinite() && q > 0.0 {
            return Ok(Exponent::Infinite);
        }
        if !(q >= 1.0) {
            return Err(Error::InvalidExponent(format!("{q} < 1")));
        }
        Ok(Exponent::Finite(q))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    /// Hölder conjugate `q'` with `1/q + 1/q' = 1`; `1 ↔ ∞`.
    pub fn dual(&self) -> Exponent {
        match *self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(v) if v == 1.0 => Exponent::Infinite,
            Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
        }
    }

    /// `f64` view, mapping infinity to `f64::INFINITY`. Only for display and
    /// comparisons; formulas match on the variant.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => other
                .parse::<f64>()
                .map(Exponent::from)
                .map_err(|e| Error::Parse(format!("exponent {s:?}: {e}"))),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Exponent::Finite(v) => s.serialize_f64(v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::Finite(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(ExpVisitor)
    }
}
