use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Spin orientation: `Minus` carries -(g/2)B, `Plus` carries +(g/2)B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Minus,
    Plus,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Minus => -1.0,
            Spin::Plus => 1.0,
        }
    }

    pub const BOTH: [Spin; 2] = [Spin::Minus, Spin::Plus];
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Minus => "-",
            Spin::Plus => "+",
        })
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-" | "minus" | "down" => Ok(Spin::Minus),
            "+" | "plus" | "up" => Ok(Spin::Plus),
            other => Err(Error::Parse(format!("unknown spin {other:?}"))),
        }
    }
}
