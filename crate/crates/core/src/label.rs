use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ground-truth or predicted class of a water sample. `Unsafe` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Safe,
    Unsafe,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Safe, Label::Unsafe];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Safe => "safe",
            Label::Unsafe => "unsafe",
        }
    }

    pub fn is_unsafe(self) -> bool {
        self == Label::Unsafe
    }

    /// Inclusive decision rule shared by every component: unsafe iff `prob_unsafe >= threshold`.
    pub fn decide(prob_unsafe: f64, threshold: f64) -> Label {
        if prob_unsafe >= threshold {
            Label::Unsafe
        } else {
            Label::Safe
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}, expected \"safe\" or \"unsafe\"")]
pub struct ParseLabelError(pub String);

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "safe" => Ok(Label::Safe),
            "unsafe" => Ok(Label::Unsafe),
            other => Err(ParseLabelError(other.to_string())),
        }
    }
}
