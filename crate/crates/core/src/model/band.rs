use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenmode band, numbered 1 to 3 in ascending curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Band {
    One,
    Two,
    Three,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::One, Band::Two, Band::Three];

    /// Zero-based index into sorted eigen arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl TryFrom<u8> for Band {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Band::One),
            2 => Ok(Band::Two),
            3 => Ok(Band::Three),
            _ => Err(Error::InvalidInput(format!("band must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl From<Band> for u8 {
    fn from(b: Band) -> u8 {
        b.number()
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s.trim().parse().map_err(|_| Error::InvalidInput(format!("band must be 1, 2 or 3, got '{s}'")))?;
        Band::try_from(n)
    }
}
