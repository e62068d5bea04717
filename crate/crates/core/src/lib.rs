//! Core of a data-driven propositional logic proof tutor.
//!
//! - [`logic`]: formulas, parsing, truth tables, and the rule catalog.
//! - [`proof`]: the live proof graph a student edits.
//! - [`hints`]: interaction networks, value iteration, and hint selection.
//! - [`session`]: tutor phases, the unsolicited-hint scheduler, and the event log.
//! - [`simulator`]: synthetic students for corpus generation.
//! - [`analytics`]: per-student metrics and cohort statistics.

pub mod logic;
pub mod hints;
pub mod proof;
pub mod session;
pub mod simulator;
pub mod analytics;
