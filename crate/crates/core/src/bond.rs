use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Bond number `Bo = rho g l^2 / sigma`. `Infinite` means no surface tension
/// and selects the decoupled formulas; it is never represented by a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BondNumber {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid Bond number {0:?}: expected a positive finite value or \"inf\"")]
pub struct InvalidBond(pub String);

impl BondNumber {
    pub fn finite(value: f64) -> Result<Self, InvalidBond> {
        if value > 0.0 && value.is_finite() {
            Ok(Self::Finite(value))
        } else {
            Err(InvalidBond(value.to_string()))
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// Re-checks the invariant for values built through the public variant.
    pub fn validate(self) -> Result<Self, InvalidBond> {
        match self {
            Self::Finite(v) => Self::finite(v),
            Self::Infinite => Ok(self),
        }
    }
}

impl fmt::Display for BondNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for BondNumber {
    type Err = InvalidBond;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Self::Infinite),
            _ => {
                let v: f64 = t.parse().map_err(|_| InvalidBond(s.to_string()))?;
                Self::finite(v).map_err(|_| InvalidBond(s.to_string()))
            }
        }
    }
}

impl Serialize for BondNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => serializer.serialize_f64(*v),
            Self::Infinite => serializer.serialize_str("inf"),
        }
    }
}
