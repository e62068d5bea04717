use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{Formula, RuleId};
use crate::proof::{DeleteReport, NodeId, ProblemDef};

use super::live::{LiveAttempt, Session, SessionError, ShownHint, StepReport};
use super::phase::{Curriculum, Phase};

/// Drives a [`Session`] through the curriculum: intro, pretest, training and
/// posttest, moving on whenever a problem is completed or skipped.
pub struct CurriculumRun {
    pub session: Session,
    curriculum: Arc<Curriculum>,
    position: usize,
    rng: ChaCha8Rng,
}

impl CurriculumRun {
    /// Starts the first problem. `seed` drives the scheduler seeds.
    pub fn begin(session: Session, curriculum: Arc<Curriculum>, seed: u64, t_ms: u64) -> Result<CurriculumRun, SessionError> {
        let mut run = CurriculumRun {
            session,
            curriculum,
            position: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        run.start_current(t_ms)?;
        Ok(run)
    }

    fn entry(&self, position: usize) -> Option<(Phase, ProblemDef, bool)> {
        let seq = self.curriculum.sequence();
        seq.get(position)
            .map(|(ph, p)| (*ph, (*p).clone(), *ph == Phase::Intro && self.curriculum.is_worked_example(&p.id)))
    }

    fn start_current(&mut self, t_ms: u64) -> Result<(), SessionError> {
        if let Some((phase, problem, worked)) = self.entry(self.position) {
            let seed = self.rng.random();
            self.session.start_problem(&problem, phase, worked, seed, t_ms)?;
        }
        Ok(())
    }

    fn advance(&mut self, t_ms: u64) -> Result<(), SessionError> {
        self.position += 1;
        self.start_current(t_ms)
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn len(&self) -> usize {
        self.curriculum.sequence().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn finished(&self) -> bool {
        self.position >= self.len()
    }

    pub fn phase(&self) -> Option<Phase> {
        self.current().map(|a| a.phase)
    }

    pub fn current(&self) -> Option<&LiveAttempt> {
        self.session.current()
    }

    pub fn curriculum(&self) -> &Curriculum {
        &self.curriculum
    }

    /// Problems still ahead in `phase`, the current one included.
    pub fn remaining_in_phase(&self, phase: Phase) -> Vec<String> {
        self.curriculum
            .sequence()
            .iter()
            .skip(self.position)
            .filter(|(ph, _)| *ph == phase)
            .map(|(_, p)| p.id.clone())
            .collect()
    }

    pub fn step(
        &mut self,
        premises: &[NodeId],
        rule: RuleId,
        claimed: Option<&Formula>,
        t_ms: u64,
    ) -> Result<StepReport, SessionError> {
        let report = self.session.step(premises, rule, claimed, t_ms)?;
        if report.completed {
            self.advance(t_ms)?;
        }
        Ok(report)
    }

    pub fn request_hint(&mut self, t_ms: u64) -> Result<ShownHint, SessionError> {
        self.session.request_hint(t_ms)
    }

    pub fn delete(&mut self, node: NodeId, t_ms: u64) -> Result<DeleteReport, SessionError> {
        self.session.delete(node, t_ms)
    }

    pub fn restart(&mut self, t_ms: u64) -> Result<(), SessionError> {
        let seed = self.rng.random();
        self.session.restart(seed, t_ms)?;
        Ok(())
    }

    pub fn skip(&mut self, t_ms: u64) -> Result<(), SessionError> {
        self.session.skip(t_ms)?;
        self.advance(t_ms)
    }
}
