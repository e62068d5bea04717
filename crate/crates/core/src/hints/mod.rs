//! Hint Factory: interaction networks built from past attempts, value
//! iteration over them, and Next-Step / Waypoint hint selection.

mod network;
mod select;
mod snapshot;
mod value;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::logic::Formula;
use crate::proof::StateKey;

pub use network::{build_network, build_network_from_attempts, Delta, InteractionNetwork, NetworkLibrary, StateInfo, Transition};
pub use select::{match_state, match_statements, next_step_hint, waypoint_hint, StateMatch};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotError, SNAPSHOT_HEADER};
pub use value::{value_iterate, RewardConfig, ValueReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HintType {
    #[serde(rename = "NS", alias = "ns")]
    NextStep,
    #[serde(rename = "WP", alias = "wp")]
    Waypoint,
}

impl HintType {
    pub fn code(self) -> &'static str {
        match self {
            HintType::NextStep => "NS",
            HintType::Waypoint => "WP",
        }
    }
}

impl fmt::Display for HintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for HintType {
    type Err = String;

    fn from_str(s: &str) -> Result<HintType, String> {
        match s.to_ascii_lowercase().as_str() {
            "ns" => Ok(HintType::NextStep),
            "wp" => Ok(HintType::Waypoint),
            _ => Err(format!("unknown hint type {s:?}, expected ns or wp")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HintSource {
    Unsolicited,
    Requested,
}

/// A pointing hint: a statement to derive next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hint {
    pub statement: Formula,
    pub hint_type: HintType,
    /// Network state the hint leads to.
    pub target_state: StateKey,
    /// Rule applications from the matched state: 1 for NS, 2 or 3 for WP.
    pub depth: u8,
    pub value: Option<f64>,
    pub source: HintSource,
    /// Recent statements dropped to find the student's state in the network.
    #[serde(default)]
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HintError {
    #[error("EmptyCorpus: no attempts for problem {0}")]
    EmptyCorpus(String),
    #[error("NoConvergence: residual {residual} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("NoMatch: state not present in the network")]
    NoMatch,
    #[error("NoHintAvailable")]
    NoHintAvailable,
    #[error("AlreadySolved")]
    AlreadySolved,
    #[error("network for {0} has no values; run value iteration first")]
    Unsolved(String),
    #[error("no network for problem {0}")]
    NoNetwork(String),
    #[error(transparent)]
    Corrupt(#[from] crate::session::CorruptLog),
}
