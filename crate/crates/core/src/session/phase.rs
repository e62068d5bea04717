use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::proof::{ProblemDef, ProblemLoadError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Intro,
    Pretest,
    Training,
    Posttest,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Intro, Phase::Pretest, Phase::Training, Phase::Posttest];

    /// Hints, on request or unsolicited, exist only in training.
    pub fn hints_enabled(self) -> bool {
        self == Phase::Training
    }

    /// Skip and restart buttons are training-only as well.
    pub fn skip_enabled(self) -> bool {
        self == Phase::Training
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Intro => "intro",
            Phase::Pretest => "pretest",
            Phase::Training => "training",
            Phase::Posttest => "posttest",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Problem ids per phase. Intro problems listed in `worked_examples` are
/// clicked through from their expert script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    pub intro: Vec<String>,
    #[serde(default)]
    pub worked_examples: Vec<String>,
    pub pretest: Vec<String>,
    pub training: Vec<String>,
    pub posttest: Vec<String>,
}

impl CurriculumConfig {
    pub fn phase(&self, phase: Phase) -> &[String] {
        match phase {
            Phase::Intro => &self.intro,
            Phase::Pretest => &self.pretest,
            Phase::Training => &self.training,
            Phase::Posttest => &self.posttest,
        }
    }

    /// Problem counts of the standard study: 3 intro (2 worked), 1 pretest,
    /// 18 training, 4 posttest.
    pub fn has_standard_shape(&self) -> bool {
        self.intro.len() == 3
            && self.worked_examples.len() == 2
            && self.pretest.len() == 1
            && self.training.len() == 18
            && self.posttest.len() == 4
    }
}

/// A curriculum config together with its problem definitions.
#[derive(Debug, Clone)]
pub struct Curriculum {
    pub config: CurriculumConfig,
    pub problems: BTreeMap<String, ProblemDef>,
}

#[derive(Debug, thiserror::Error)]
pub enum CurriculumError {
    #[error(transparent)]
    Problem(#[from] ProblemLoadError),
    #[error("{path}: {reason}")]
    Config { path: String, reason: String },
    #[error("curriculum references unknown problem {0}")]
    UnknownProblem(String),
}

impl Curriculum {
    pub fn new(config: CurriculumConfig, problems: Vec<ProblemDef>) -> Result<Curriculum, CurriculumError> {
        let problems: BTreeMap<String, ProblemDef> =
            problems.into_iter().map(|p| (p.id.clone(), p)).collect();
        for phase in Phase::ALL {
            for id in config.phase(phase) {
                if !problems.contains_key(id) {
                    return Err(CurriculumError::UnknownProblem(id.clone()));
                }
            }
        }
        for id in &config.worked_examples {
            if !config.intro.contains(id) || problems[id].expert.is_empty() {
                return Err(CurriculumError::UnknownProblem(id.clone()));
            }
        }
        Ok(Curriculum { config, problems })
    }

    /// Reads `<dir>/curriculum.json` and `<dir>/problems/*.json`.
    pub fn load(dir: &Path) -> Result<Curriculum, CurriculumError> {
        let path = dir.join("curriculum.json");
        let config_err = |reason: String| CurriculumError::Config {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(e.to_string()))?;
        let config: CurriculumConfig = serde_json::from_str(&text).map_err(|e| config_err(e.to_string()))?;
        let problems = ProblemDef::load_dir(&dir.join("problems"))?;
        Curriculum::new(config, problems)
    }

    pub fn problem(&self, id: &str) -> Option<&ProblemDef> {
        self.problems.get(id)
    }

    /// The `(phase, problem)` sequence a student works through.
    pub fn sequence(&self) -> Vec<(Phase, &ProblemDef)> {
        Phase::ALL
            .into_iter()
            .flat_map(|ph| self.config.phase(ph).iter().map(move |id| (ph, &self.problems[id])))
            .collect()
    }

    pub fn is_worked_example(&self, id: &str) -> bool {
        self.config.worked_examples.iter().any(|w| w == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_flags() {
        for p in Phase::ALL {
            assert_eq!(p.hints_enabled(), p == Phase::Training);
            assert_eq!(p.skip_enabled(), p == Phase::Training);
        }
        assert_eq!(serde_json::to_string(&Phase::Posttest).unwrap(), "\"posttest\"");
    }
}
