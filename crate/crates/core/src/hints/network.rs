use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::logic::{Formula, RuleId};
use crate::proof::StateKey;
use crate::session::{replay, AttemptOutcome, AttemptReplay, SessionLog};

pub use crate::session::Delta;

use super::value::{value_iterate, RewardConfig, ValueReport};
use super::HintError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateInfo {
    pub key: StateKey,
    pub visits: u64,
    /// Completed attempts that passed through this state.
    pub correct: u64,
    /// Rejected steps taken while in this state.
    pub errors: u64,
    pub goal: bool,
}

impl StateInfo {
    pub fn err_frac(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            (self.errors as f64 / self.visits as f64).min(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub src: StateKey,
    pub dst: StateKey,
    pub rule: Option<RuleId>,
    pub delta: Delta,
    pub freq: u64,
}

/// Proof states seen across historical attempts of one problem, and the
/// moves between them.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionNetwork {
    pub problem_id: String,
    pub givens: Vec<Formula>,
    pub conclusion: Formula,
    pub catalog: Vec<RuleId>,
    pub initial: StateKey,
    states: BTreeMap<StateKey, StateInfo>,
    transitions: Vec<Transition>,
    values: BTreeMap<StateKey, f64>,
    adds_from: BTreeMap<StateKey, Vec<usize>>,
}

fn differs_by_one(src: &StateKey, dst: &StateKey, delta: &Delta) -> bool {
    let mut s: BTreeSet<Formula> = src.statements().into_iter().collect();
    let d: BTreeSet<Formula> = dst.statements().into_iter().collect();
    let changed = match delta {
        Delta::Added(f) => s.insert(f.clone()),
        Delta::Removed(f) => s.remove(f),
    };
    changed && s == d
}

impl InteractionNetwork {
    /// Assembles a network from explicit parts, checking its invariants.
    pub fn from_parts(
        problem_id: impl Into<String>,
        givens: Vec<Formula>,
        conclusion: Formula,
        catalog: Vec<RuleId>,
        states: Vec<StateInfo>,
        transitions: Vec<Transition>,
    ) -> Result<InteractionNetwork, String> {
        let conclusion_text = conclusion.render();
        let initial = StateKey::from_statements(&givens);
        let states: BTreeMap<StateKey, StateInfo> = states.into_iter().map(|s| (s.key.clone(), s)).collect();
        for s in states.values() {
            if s.visits == 0 {
                return Err(format!("state {} has no visits", s.key));
            }
            let goal = s.key.as_str().split(crate::proof::KEY_SEPARATOR).any(|x| x == conclusion_text);
            if goal != s.goal {
                return Err(format!("goal flag of {} disagrees with its statements", s.key));
            }
        }
        for t in &transitions {
            if t.freq == 0 {
                return Err(format!("transition {} -> {} has frequency 0", t.src, t.dst));
            }
            if !states.contains_key(&t.src) || !states.contains_key(&t.dst) {
                return Err(format!("transition {} -> {} references an unknown state", t.src, t.dst));
            }
            if !differs_by_one(&t.src, &t.dst, &t.delta) {
                return Err(format!("transition {} -> {} is not a single-statement change", t.src, t.dst));
            }
        }
        let mut net = InteractionNetwork {
            problem_id: problem_id.into(),
            givens,
            conclusion,
            catalog,
            initial,
            states,
            transitions,
            values: BTreeMap::new(),
            adds_from: BTreeMap::new(),
        };
        net.index();
        Ok(net)
    }

    fn index(&mut self) {
        self.transitions
            .sort_by(|a, b| (&a.src, &a.dst, a.rule, &a.delta).cmp(&(&b.src, &b.dst, b.rule, &b.delta)));
        self.adds_from.clear();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.delta.is_add() {
                self.adds_from.entry(t.src.clone()).or_default().push(i);
            }
        }
    }

    pub fn states(&self) -> &BTreeMap<StateKey, StateInfo> {
        &self.states
    }

    pub fn state(&self, key: &StateKey) -> Option<&StateInfo> {
        self.states.get(key)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Add-transitions leaving `key`, ordered by destination.
    pub fn adds_from<'a>(&'a self, key: &StateKey) -> impl Iterator<Item = &'a Transition> + 'a {
        self.adds_from
            .get(key)
            .into_iter()
            .flatten()
            .map(move |&i| &self.transitions[i])
    }

    pub fn values(&self) -> &BTreeMap<StateKey, f64> {
        &self.values
    }

    pub fn value(&self, key: &StateKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn is_solved(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn set_values(&mut self, values: BTreeMap<StateKey, f64>) {
        self.values = values;
    }

    /// Runs value iteration and stores the result.
    pub fn solve(&mut self, cfg: &RewardConfig) -> Result<ValueReport, HintError> {
        let report = value_iterate(self, cfg)?;
        self.values = report.values.clone();
        Ok(report)
    }
}

/// Builds the network of problem `pid` from session logs.
pub fn build_network(logs: &[SessionLog], pid: &str) -> Result<InteractionNetwork, HintError> {
    let mut attempts = Vec::new();
    for log in logs {
        attempts.extend(replay(log)?.attempts.into_iter().filter(|a| a.pid == pid));
    }
    build_network_from_attempts(&attempts, pid)
}

/// Builds the network of problem `pid` from already replayed attempts; other
/// problems' attempts are ignored.
pub fn build_network_from_attempts(attempts: &[AttemptReplay], pid: &str) -> Result<InteractionNetwork, HintError> {
    let attempts: Vec<&AttemptReplay> = attempts.iter().filter(|a| a.pid == pid).collect();
    let first = attempts.first().ok_or_else(|| HintError::EmptyCorpus(pid.to_string()))?;
    let givens = first.start.givens.clone();
    let conclusion = first.start.conclusion.clone();
    let conclusion_text = conclusion.render();
    let mut states: BTreeMap<StateKey, StateInfo> = BTreeMap::new();
    let mut moves: BTreeMap<(StateKey, StateKey, Option<RuleId>, Delta), u64> = BTreeMap::new();
    let visit = |states: &mut BTreeMap<StateKey, StateInfo>, key: &StateKey| {
        states
            .entry(key.clone())
            .or_insert_with(|| StateInfo {
                key: key.clone(),
                visits: 0,
                correct: 0,
                errors: 0,
                goal: key.as_str().split(crate::proof::KEY_SEPARATOR).any(|x| x == conclusion_text),
            })
            .visits += 1;
    };
    for a in &attempts {
        visit(&mut states, &a.trace.keys[0]);
        for t in &a.trace.transitions {
            visit(&mut states, &t.dst);
            *moves
                .entry((t.src.clone(), t.dst.clone(), t.rule, t.delta.clone()))
                .or_default() += 1;
        }
        for k in &a.error_keys {
            if let Some(s) = states.get_mut(k) {
                s.errors += 1;
            }
        }
        if a.outcome == AttemptOutcome::Completed {
            let seen: BTreeSet<&StateKey> = a.trace.keys.iter().collect();
            for k in seen {
                states.get_mut(k).expect("visited").correct += 1;
            }
        }
    }
    let transitions = moves
        .into_iter()
        .map(|((src, dst, rule, delta), freq)| Transition {
            src,
            dst,
            rule,
            delta,
            freq,
        })
        .collect();
    InteractionNetwork::from_parts(
        pid,
        givens,
        conclusion,
        first.start.rules.clone(),
        states.into_values().collect(),
        transitions,
    )
    .map_err(|reason| HintError::Corrupt(crate::session::CorruptLog {
        file: None,
        line: None,
        seq: None,
        reason,
    }))
}

/// Solved networks by problem id, shared by live sessions.
#[derive(Debug, Clone, Default)]
pub struct NetworkLibrary {
    networks: BTreeMap<String, InteractionNetwork>,
}

impl NetworkLibrary {
    pub fn new() -> NetworkLibrary {
        NetworkLibrary::default()
    }

    pub fn insert(&mut self, net: InteractionNetwork) {
        self.networks.insert(net.problem_id.clone(), net);
    }

    pub fn get(&self, pid: &str) -> Option<&InteractionNetwork> {
        self.networks.get(pid)
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn problem_ids(&self) -> impl Iterator<Item = &str> {
        self.networks.keys().map(String::as_str)
    }

    /// Builds and solves a network for every problem in `pids` that has
    /// attempts in `attempts`; problems without data are left out.
    pub fn build(attempts: &[AttemptReplay], pids: &[String], cfg: &RewardConfig) -> Result<NetworkLibrary, HintError> {
        let mut lib = NetworkLibrary::new();
        for pid in pids {
            match build_network_from_attempts(attempts, pid) {
                Ok(mut net) => {
                    net.solve(cfg)?;
                    lib.insert(net);
                }
                Err(HintError::EmptyCorpus(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(lib)
    }

    /// Loads every `*.net` snapshot in `dir`.
    pub fn load_dir(dir: &Path) -> Result<NetworkLibrary, super::SnapshotError> {
        let mut lib = NetworkLibrary::new();
        let io = |e: std::io::Error| super::SnapshotError {
            line: 0,
            reason: format!("{}: {e}", dir.display()),
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.sort();
        for path in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "net")) {
            let text = std::fs::read_to_string(&path).map_err(io)?;
            lib.insert(super::read_snapshot(&text)?);
        }
        Ok(lib)
    }
}
