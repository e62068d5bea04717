use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::logic::{Formula, RuleId};
use crate::session::Phase;

/// One step of a worked or expert solution, addressed by statement text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub premises: Vec<Formula>,
    pub rule: RuleId,
    pub conclusion: Formula,
}

/// A proof problem as stored on disk, one JSON file per problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDef {
    pub id: String,
    pub givens: Vec<Formula>,
    pub conclusion: Formula,
    /// Rules offered for this problem.
    pub rules: Vec<RuleId>,
    /// Step count of the expert solution; the problem length used by the
    /// hint scheduler.
    pub expert_length: usize,
    pub phase: Phase,
    #[serde(default)]
    pub focus: String,
    /// Shortest known solution, in derivation order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expert: Vec<ScriptStep>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemLoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

impl ProblemDef {
    /// Structural checks that do not need the proof kernel.
    pub fn check(&self) -> Result<(), String> {
        if self.givens.is_empty() {
            return Err("problem has no givens".into());
        }
        if self.givens.contains(&self.conclusion) {
            return Err("conclusion is already a given".into());
        }
        if self.rules.is_empty() {
            return Err("problem offers no rules".into());
        }
        if let Some(step) = self.expert.iter().find(|s| !self.rules.contains(&s.rule)) {
            return Err(format!("expert step uses {} which the problem does not offer", step.rule));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ProblemDef, ProblemLoadError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ProblemLoadError::Io {
            path: name.clone(),
            source,
        })?;
        let def: ProblemDef = serde_json::from_str(&text).map_err(|source| ProblemLoadError::Json {
            path: name.clone(),
            source,
        })?;
        def.check()
            .map_err(|reason| ProblemLoadError::Invalid { path: name, reason })?;
        Ok(def)
    }

    /// Loads every `*.json` file in `dir`, sorted by problem id.
    pub fn load_dir(dir: &Path) -> Result<Vec<ProblemDef>, ProblemLoadError> {
        let io = |source| ProblemLoadError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.extension().is_some_and(|e| e == "json") {
                out.push(ProblemDef::load(&path)?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Distinct rules of the expert solution, in first-use order.
    pub fn focus_rules(&self) -> Vec<RuleId> {
        let mut out = Vec::new();
        for step in &self.expert {
            if !out.contains(&step.rule) {
                out.push(step.rule);
            }
        }
        out
    }

    /// Every atom letter appearing in the givens and conclusion.
    pub fn atoms(&self) -> Vec<char> {
        let mut set = self.conclusion.atoms();
        for g in &self.givens {
            set.extend(g.atoms());
        }
        set.into_iter().collect()
    }
}
