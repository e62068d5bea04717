//! Test support for the prooftutor crates: oracles written independently of
//! the production code paths, fixed example networks and proofs, and random
//! generators.

pub mod fixtures;
pub mod formulas;
pub mod networks;
pub mod oracles;
pub mod sessions;
