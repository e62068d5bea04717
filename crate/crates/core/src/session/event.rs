use serde::{Deserialize, Serialize};

use crate::hints::{HintSource, HintType};
use crate::logic::{Formula, RuleId};
use crate::proof::NodeId;

use super::phase::Phase;

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub sid: String,
    pub pid: String,
    pub seq: u64,
    pub t_ms: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ProblemStart,
    Select,
    Apply,
    Derive,
    DeriveError,
    Delete,
    HintShown,
    HintJustified,
    HintRequestDenied,
    Restart,
    Skip,
    Complete,
}

/// Everything needed to rebuild the problem and its scheduler from the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemStart {
    pub student: String,
    pub condition: Option<HintType>,
    pub phase: Phase,
    /// Attempt number for this problem within the session, from 0.
    pub attempt: u32,
    pub givens: Vec<Formula>,
    pub conclusion: Formula,
    pub rules: Vec<RuleId>,
    pub expert_length: usize,
    pub sched_seed: u64,
    #[serde(default)]
    pub worked_example: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    ProblemStart(ProblemStart),
    Select {
        nodes: Vec<NodeId>,
    },
    /// A rule selection the tutor answered with a request for the statement.
    Apply {
        premises: Vec<NodeId>,
        rule: RuleId,
        options: Option<Vec<Formula>>,
    },
    Derive {
        premises: Vec<NodeId>,
        rule: RuleId,
        statement: Formula,
        node: NodeId,
        #[serde(default)]
        justified_hint: bool,
        #[serde(default)]
        redundant: bool,
    },
    DeriveError {
        premises: Vec<NodeId>,
        rule: RuleId,
        claimed: Option<Formula>,
        error: String,
    },
    Delete {
        node: NodeId,
        removed: Vec<Formula>,
        reverted: Vec<NodeId>,
    },
    HintShown {
        node: NodeId,
        statement: Formula,
        hint_type: HintType,
        source: HintSource,
        depth: u8,
        value: Option<f64>,
        target: Option<String>,
    },
    HintJustified {
        node: NodeId,
        statement: Formula,
        /// Derivation attempts since the hint appeared, including this one.
        steps: usize,
    },
    HintRequestDenied {},
    Restart {},
    Skip {},
    Complete {},
}

impl EventBody {
    pub fn kind(&self) -> EventKind {
        match self {
            EventBody::ProblemStart(_) => EventKind::ProblemStart,
            EventBody::Select { .. } => EventKind::Select,
            EventBody::Apply { .. } => EventKind::Apply,
            EventBody::Derive { .. } => EventKind::Derive,
            EventBody::DeriveError { .. } => EventKind::DeriveError,
            EventBody::Delete { .. } => EventKind::Delete,
            EventBody::HintShown { .. } => EventKind::HintShown,
            EventBody::HintJustified { .. } => EventKind::HintJustified,
            EventBody::HintRequestDenied {} => EventKind::HintRequestDenied,
            EventBody::Restart {} => EventKind::Restart,
            EventBody::Skip {} => EventKind::Skip,
            EventBody::Complete {} => EventKind::Complete,
        }
    }

    /// Events that end the current problem attempt.
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind(), EventKind::Restart | EventKind::Skip | EventKind::Complete)
    }

    /// Derivation attempts: the events counted as steps.
    pub fn is_step(&self) -> bool {
        matches!(self.kind(), EventKind::Derive | EventKind::DeriveError)
    }
}

impl SessionEvent {
    pub fn kind(&self) -> EventKind {
        self.body.kind()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_field_names() {
        let ev = SessionEvent {
            sid: "s1".into(),
            pid: "p1".into(),
            seq: 3,
            t_ms: 1000,
            body: EventBody::Skip {},
        };
        let line = ev.to_json_line();
        assert_eq!(line, r#"{"sid":"s1","pid":"p1","seq":3,"t_ms":1000,"kind":"skip","payload":{}}"#);
        let back: SessionEvent = serde_json::from_str(&line).unwrap();
        assert_eq!(back, ev);
    }

    #[test]
    fn derive_payload_round_trips() {
        let ev = SessionEvent {
            sid: "s".into(),
            pid: "p".into(),
            seq: 0,
            t_ms: 5,
            body: EventBody::Derive {
                premises: vec![NodeId(0)],
                rule: RuleId::Simp,
                statement: "F".parse().unwrap(),
                node: NodeId(4),
                justified_hint: false,
                redundant: false,
            },
        };
        let line = ev.to_json_line();
        assert!(line.contains(r#""kind":"derive","payload":{"premises":[0],"rule":"Simp","statement":"F""#));
        assert_eq!(serde_json::from_str::<SessionEvent>(&line).unwrap(), ev);
        assert!(ev.body.is_step());
        assert!(!ev.body.is_terminal());
    }
}
