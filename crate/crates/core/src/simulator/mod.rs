//! Synthetic students. They drive real sessions, so every step they take is
//! checked by the proof kernel and logged like a human's.

mod search;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hints::{HintType, NetworkLibrary};
use crate::logic::{enumerate_conclusions, validate_derivation, Formula, RuleId, RuleOutcome};
use crate::proof::{NodeId, ProblemDef, ProofState, ScriptStep};
use crate::session::{EventBody, Phase, Session, SessionError, SessionLog};

pub use search::plan_derivation;

/// Steps after which a simulated student gives up on a problem.
pub const STEP_CAP: usize = 60;

/// Search depth used when working toward a hint.
pub const FOLLOW_DEPTH: usize = 3;

/// Fixed epoch for simulated clocks, so corpora are reproducible.
pub const SIM_EPOCH_MS: u64 = 1_700_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudentPolicy {
    pub name: String,
    /// Chance of working toward a visible hint on a given step.
    pub p_follow: f64,
    /// Chance that a step is an invalid rule application.
    pub p_err: f64,
    /// Chance that an exploratory step follows the expert solution.
    pub beta: f64,
    pub p_giveup_per_step: f64,
    #[serde(default)]
    pub seed: u64,
}

impl StudentPolicy {
    pub fn check(&self) -> Result<(), String> {
        for (name, p) in [
            ("p_follow", self.p_follow),
            ("p_err", self.p_err),
            ("beta", self.beta),
            ("p_giveup_per_step", self.p_giveup_per_step),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("policy {}: {name} = {p} is not a probability", self.name));
            }
        }
        Ok(())
    }

    /// Follows every hint and never errs.
    pub fn ideal(seed: u64) -> StudentPolicy {
        StudentPolicy {
            name: "ideal".into(),
            p_follow: 1.0,
            p_err: 0.0,
            beta: 0.5,
            p_giveup_per_step: 0.0,
            seed,
        }
    }
}

/// Policy entry of a mix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCount {
    #[serde(flatten)]
    pub policy: StudentPolicy,
    pub count: usize,
}

/// A TOML file of `[[policy]]` tables, each a policy plus a student count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMix {
    pub policy: Vec<PolicyCount>,
}

impl PolicyMix {
    pub fn from_toml(text: &str) -> Result<PolicyMix, String> {
        let mix: PolicyMix = toml::from_str(text).map_err(|e| e.to_string())?;
        for p in &mix.policy {
            p.policy.check()?;
        }
        Ok(mix)
    }

    pub fn students(&self) -> usize {
        self.policy.iter().map(|p| p.count).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("NoExpertScript: problem {0} has no expert solution")]
    NoExpertScript(String),
    #[error("CorpusTooSparse: no completed attempt of problem {0}")]
    CorpusTooSparse(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

struct Student<'a> {
    policy: &'a StudentPolicy,
    rng: ChaCha8Rng,
    clock: u64,
}

impl Student<'_> {
    fn tick(&mut self) -> u64 {
        self.clock += self.rng.random_range(5_000..60_000);
        self.clock
    }

    fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.random::<f64>() < p
    }
}

fn justified_ids(state: &ProofState) -> Vec<(NodeId, Formula)> {
    state
        .justified_nodes()
        .into_iter()
        .map(|n| (n.id, n.statement.clone()))
        .collect()
}

fn ids_for(state: &ProofState, premises: &[Formula]) -> Option<Vec<NodeId>> {
    let by_statement = state.ids_by_statement();
    premises
        .iter()
        .map(|p| {
            let id = *by_statement.get(p)?;
            state.node(id).filter(|n| n.is_justified()).map(|n| n.id)
        })
        .collect()
}

fn is_justified(state: &ProofState, statement: &Formula) -> bool {
    state.nodes().iter().any(|n| &n.statement == statement && n.is_justified())
}

/// Next expert step not yet done whose premises are all on screen.
fn expert_step<'a>(problem: &'a ProblemDef, state: &ProofState) -> Option<&'a ScriptStep> {
    problem
        .expert
        .iter()
        .find(|s| !is_justified(state, &s.conclusion) && ids_for(state, &s.premises).is_some())
}

fn pick_premises(student: &mut Student, nodes: &[(NodeId, Formula)], arity: usize) -> Option<Vec<usize>> {
    if nodes.len() < arity {
        return None;
    }
    let first = student.rng.random_range(0..nodes.len());
    if arity == 1 {
        return Some(vec![first]);
    }
    let mut second = student.rng.random_range(0..nodes.len() - 1);
    if second >= first {
        second += 1;
    }
    Some(vec![first, second])
}

/// A valid step chosen at random, or `None` when sampling finds nothing new.
fn random_step(student: &mut Student, problem: &ProblemDef, state: &ProofState) -> Option<(Vec<NodeId>, RuleId, Formula)> {
    let nodes = justified_ids(state);
    let cap = problem.givens.iter().chain([&problem.conclusion]).map(Formula::size).max().unwrap_or(1) + 3;
    let atoms = problem.atoms();
    for _ in 0..40 {
        let rule = problem.rules[student.rng.random_range(0..problem.rules.len())];
        let Some(sel) = pick_premises(student, &nodes, rule.arity()) else { continue };
        let premises: Vec<Formula> = sel.iter().map(|&i| nodes[i].1.clone()).collect();
        let conclusion = match enumerate_conclusions(rule, &premises) {
            Err(_) => continue,
            Ok(RuleOutcome::Finite(set)) => {
                let options: Vec<Formula> = set.into_iter().collect();
                options[student.rng.random_range(0..options.len())].clone()
            }
            Ok(RuleOutcome::Unbounded) => {
                let atom = atoms[student.rng.random_range(0..atoms.len())];
                Formula::or(premises[0].clone(), Formula::atom(atom))
            }
        };
        if conclusion.size() > cap || is_justified(state, &conclusion) {
            continue;
        }
        return Some((sel.iter().map(|&i| nodes[i].0).collect(), rule, conclusion));
    }
    None
}

/// An invalid step: a rule applied where it does not fit, or a wrong claim.
fn invalid_step(student: &mut Student, problem: &ProblemDef, state: &ProofState) -> (Vec<NodeId>, RuleId, Option<Formula>) {
    let nodes = justified_ids(state);
    loop {
        let rule = problem.rules[student.rng.random_range(0..problem.rules.len())];
        let arity = if nodes.len() >= 2 && student.chance(0.5) { 2 } else { 1 };
        let sel = pick_premises(student, &nodes, arity).expect("at least one given");
        let premises: Vec<Formula> = sel.iter().map(|&i| nodes[i].1.clone()).collect();
        let claimed = Formula::not(premises[0].clone());
        if !matches!(validate_derivation(rule, &premises, &claimed), Ok(true)) {
            return (sel.iter().map(|&i| nodes[i].0).collect(), rule, Some(claimed));
        }
    }
}

/// Runs one attempt of the session's current problem until it completes or
/// the student gives up.
fn play_attempt(session: &mut Session, student: &mut Student, problem: &ProblemDef) -> Result<(), SimError> {
    let mut plan: Option<(NodeId, usize, Option<Vec<ScriptStep>>)> = None;
    let mut steps = 0;
    loop {
        let Some(attempt) = session.current() else { return Ok(()) };
        let state = &attempt.state;
        if steps >= STEP_CAP || student.chance(student.policy.p_giveup_per_step) {
            let t = student.tick();
            session.skip(t)?;
            return Ok(());
        }
        steps += 1;
        let t = student.tick();
        if student.chance(student.policy.p_err) {
            let (ids, rule, claimed) = invalid_step(student, problem, state);
            session.step(&ids, rule, claimed.as_ref(), t)?;
            continue;
        }
        let mut chosen = None;
        if let Some(hint) = state.pending_hint() {
            let (hint_id, target) = (hint.id, hint.statement.clone());
            if student.chance(student.policy.p_follow) {
                let statements = state.justified_statements();
                if plan.as_ref().is_none_or(|(h, n, p)| *h != hint_id || (p.is_none() && *n != statements.len())) {
                    let found = plan_derivation(&statements, &target, &problem.rules, FOLLOW_DEPTH);
                    plan = Some((hint_id, statements.len(), found));
                }
                if let Some((_, _, Some(p))) = plan.as_mut() {
                    p.retain(|s| !is_justified(state, &s.conclusion));
                    if let Some(s) = p.first() {
                        chosen = ids_for(state, &s.premises).map(|ids| (ids, s.rule, s.conclusion.clone()));
                    }
                }
            }
        }
        if chosen.is_none() {
            if student.chance(student.policy.beta) {
                chosen = expert_step(problem, state)
                    .and_then(|s| ids_for(state, &s.premises).map(|ids| (ids, s.rule, s.conclusion.clone())));
            }
            if chosen.is_none() {
                chosen = random_step(student, problem, state);
            }
            if chosen.is_none() {
                chosen = expert_step(problem, state)
                    .and_then(|s| ids_for(state, &s.premises).map(|ids| (ids, s.rule, s.conclusion.clone())));
            }
        }
        let Some((ids, rule, conclusion)) = chosen else {
            session.skip(t)?;
            return Ok(());
        };
        session.step(&ids, rule, Some(&conclusion), t)?;
    }
}

/// Simulates one training attempt of `problem` under `condition`.
pub fn simulate_attempt(
    policy: &StudentPolicy,
    problem: &ProblemDef,
    condition: Option<HintType>,
    networks: &Arc<NetworkLibrary>,
    sid: &str,
) -> Result<SessionLog, SimError> {
    policy.check().map_err(SimError::InvalidPolicy)?;
    if problem.expert.is_empty() {
        return Err(SimError::NoExpertScript(problem.id.clone()));
    }
    let mut student = Student {
        policy,
        rng: ChaCha8Rng::seed_from_u64(policy.seed),
        clock: SIM_EPOCH_MS,
    };
    let mut session = Session::new(sid, &policy.name, condition, Arc::clone(networks));
    let seed = student.rng.next_u64();
    session.start_problem(problem, Phase::Training, false, seed, student.clock)?;
    play_attempt(&mut session, &mut student, problem)?;
    Ok(session.into_log())
}

/// Seed of student `index` under master seed `seed`.
pub fn student_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// One session per simulated student, each attempting every problem once
/// with no hints. Output depends only on the inputs, not on thread count.
pub fn generate_corpus(mix: &[PolicyCount], problems: &[ProblemDef], seed: u64) -> Result<Vec<SessionLog>, SimError> {
    for p in mix {
        p.policy.check().map_err(SimError::InvalidPolicy)?;
    }
    if let Some(p) = problems.iter().find(|p| p.expert.is_empty()) {
        return Err(SimError::NoExpertScript(p.id.clone()));
    }
    let students: Vec<(usize, &StudentPolicy)> = mix
        .iter()
        .flat_map(|p| std::iter::repeat_n(&p.policy, p.count))
        .enumerate()
        .collect();
    let networks = Arc::new(NetworkLibrary::new());
    let logs = students
        .par_iter()
        .map(|&(i, policy)| {
            let mut policy = policy.clone();
            policy.seed = student_seed(seed, i);
            let mut student = Student {
                policy: &policy,
                rng: ChaCha8Rng::seed_from_u64(policy.seed),
                clock: SIM_EPOCH_MS,
            };
            let sid = format!("{}-{i:05}", policy.name);
            let mut session = Session::new(sid.clone(), sid, None, Arc::clone(&networks));
            for problem in problems {
                let seed = student.rng.next_u64();
                let t = student.tick();
                session.start_problem(problem, Phase::Training, false, seed, t)?;
                play_attempt(&mut session, &mut student, problem)?;
            }
            Ok(session.into_log())
        })
        .collect::<Result<Vec<SessionLog>, SimError>>()?;
    if !logs.is_empty() {
        let solved: BTreeSet<&str> = logs
            .iter()
            .flat_map(|l| l.events())
            .filter(|e| matches!(e.body, EventBody::Complete {}))
            .map(|e| e.pid.as_str())
            .collect();
        if let Some(p) = problems.iter().find(|p| !solved.contains(p.id.as_str())) {
            return Err(SimError::CorpusTooSparse(p.id.clone()));
        }
    }
    Ok(logs)
}
