use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Unsolicited hints allowed per attempt for an expert solution of `length` steps.
pub fn unsolicited_cap(length: usize) -> usize {
    length.div_ceil(3)
}

/// What the scheduler decided after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckDecision {
    /// Not yet time to check.
    Wait,
    /// Checked, but a hint is still waiting to be justified.
    HintPending,
    /// Checked, but the attempt's budget is used up.
    CapReached,
    /// Checked and a hint should be shown.
    Fire,
}

/// Cadence and budget of unsolicited hints for one attempt.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub unsolicited_given: usize,
    pub cap: usize,
    pub steps_since_check: usize,
    pub next_check_at: usize,
    rng: ChaCha8Rng,
}

/// Serializable view of a [`SchedulerState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SchedulerSnapshot {
    pub unsolicited_given: usize,
    pub cap: usize,
    pub steps_since_check: usize,
    pub next_check_at: usize,
}

impl SchedulerState {
    pub fn new(expert_length: usize, seed: u64) -> SchedulerState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let next_check_at = rng.random_range(2..=3);
        SchedulerState {
            unsolicited_given: 0,
            cap: unsolicited_cap(expert_length),
            steps_since_check: 0,
            next_check_at,
            rng,
        }
    }

    /// Counts one derivation attempt. `hint_pending` is whether an
    /// unjustified hint is on screen after the step was processed.
    pub fn on_step(&mut self, hint_pending: bool) -> CheckDecision {
        self.steps_since_check += 1;
        if self.steps_since_check < self.next_check_at {
            return CheckDecision::Wait;
        }
        self.steps_since_check = 0;
        self.next_check_at = self.rng.random_range(2..=3);
        if hint_pending {
            CheckDecision::HintPending
        } else if self.unsolicited_given >= self.cap {
            CheckDecision::CapReached
        } else {
            CheckDecision::Fire
        }
    }

    /// Records that a fired check actually produced a hint.
    pub fn record_unsolicited(&mut self) {
        debug_assert!(self.unsolicited_given < self.cap);
        self.unsolicited_given += 1;
    }

    pub fn remaining(&self) -> usize {
        self.cap - self.unsolicited_given
    }

    pub fn snapshot(&self) -> SchedulerSnapshot {
        SchedulerSnapshot {
            unsolicited_given: self.unsolicited_given,
            cap: self.cap,
            steps_since_check: self.steps_since_check,
            next_check_at: self.next_check_at,
        }
    }
}
