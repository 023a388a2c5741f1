use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Target classes. Index order is alphabetical and fixed: CAG=0, NAG=1, OAG=2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    /// Covertly aggressive.
    #[serde(rename = "CAG")]
    Cag,
    /// Non-aggressive.
    #[serde(rename = "NAG")]
    Nag,
    /// Overtly aggressive.
    #[serde(rename = "OAG")]
    Oag,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Cag, Class::Nag, Class::Oag];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Cag => "CAG",
            Class::Nag => "NAG",
            Class::Oag => "OAG",
        }
    }

    pub fn is_aggressive(self) -> bool {
        matches!(self, Class::Cag | Class::Oag)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "CAG" => Ok(Class::Cag),
            "NAG" => Ok(Class::Nag),
            "OAG" => Ok(Class::Oag),
            other => Err(Error::InvalidLabel(format!("unknown label {other:?}"))),
        }
    }
}
