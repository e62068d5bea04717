//! The proof graph a student builds: givens, derived statements, hint nodes
//! and the conclusion, linked by justifications.

mod coloring;
mod graph;
mod problem;

pub use coloring::{color_nodes, CorpusNodeStats, NodeColor, DEFAULT_GREEN_THRESHOLD};
pub use graph::{
    new_proof, DeleteReport, HintMeta, Justification, NodeId, NodeKind, ProofError, ProofNode,
    ProofState, StateKey, StepError, StepOutcome, KEY_SEPARATOR,
};
pub use problem::{ProblemDef, ProblemLoadError, ScriptStep};
