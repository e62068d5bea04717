use std::path::PathBuf;
use std::sync::Arc;

use prooftutor_core::hints::{
    Delta, HintSource, HintType, InteractionNetwork, NetworkLibrary, RewardConfig, StateInfo, Transition,
};
use prooftutor_core::logic::{Formula, RuleId};
use prooftutor_core::proof::{new_proof, HintMeta, ProblemDef, ProofState, ScriptStep, StateKey, StepOutcome};
use prooftutor_core::session::{replay_all, AttemptReplay, Curriculum, Phase, SessionLog};
use prooftutor_core::simulator::{generate_corpus, PolicyMix};

pub fn f(s: &str) -> Formula {
    s.parse().unwrap_or_else(|e| panic!("{s:?}: {e}"))
}

pub fn fs(items: &[&str]) -> Vec<Formula> {
    items.iter().map(|s| f(s)).collect()
}

pub fn repo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn curriculum_dir() -> PathBuf {
    repo_dir().join("curriculum")
}

pub fn config_dir() -> PathBuf {
    repo_dir().join("config")
}

pub fn curriculum() -> Curriculum {
    Curriculum::load(&curriculum_dir()).expect("bundled curriculum loads")
}

pub fn training_problems() -> Vec<ProblemDef> {
    curriculum()
        .sequence()
        .into_iter()
        .filter(|(ph, _)| *ph == Phase::Training)
        .map(|(_, p)| p.clone())
        .collect()
}

pub fn policy_mix() -> PolicyMix {
    let text = std::fs::read_to_string(config_dir().join("policies.toml")).unwrap();
    PolicyMix::from_toml(&text).unwrap()
}

/// Simulated corpus over `problems` with the bundled policy mix.
pub fn corpus(problems: &[ProblemDef], seed: u64) -> Vec<SessionLog> {
    generate_corpus(&policy_mix().policy, problems, seed).unwrap()
}

pub fn attempts(logs: &[SessionLog]) -> Vec<AttemptReplay> {
    replay_all(logs).unwrap().into_iter().flat_map(|r| r.attempts).collect()
}

/// Solved networks for `problems` from a simulated corpus.
pub fn library(problems: &[ProblemDef], seed: u64) -> Arc<NetworkLibrary> {
    let pids: Vec<String> = problems.iter().map(|p| p.id.clone()).collect();
    let lib = NetworkLibrary::build(&attempts(&corpus(problems, seed)), &pids, &RewardConfig::default()).unwrap();
    Arc::new(lib)
}

pub fn problem(id: &str, givens: &[&str], conclusion: &str, expert: &[(&[&str], RuleId, &str)]) -> ProblemDef {
    ProblemDef {
        id: id.into(),
        givens: fs(givens),
        conclusion: f(conclusion),
        rules: RuleId::ALL.to_vec(),
        expert_length: expert.len(),
        phase: Phase::Training,
        focus: String::new(),
        expert: expert
            .iter()
            .map(|(p, rule, c)| ScriptStep {
                premises: fs(p),
                rule: *rule,
                conclusion: f(c),
            })
            .collect(),
    }
}

pub fn chain(pid: &str, givens: &[&str], conclusion: &str, added: &[&str]) -> InteractionNetwork {
    let mut statements = fs(givens);
    let mut keys = vec![StateKey::from_statements(&statements)];
    let mut transitions = Vec::new();
    for s in added {
        statements.push(f(s));
        let key = StateKey::from_statements(&statements);
        transitions.push(Transition {
            src: keys.last().unwrap().clone(),
            dst: key.clone(),
            rule: None,
            delta: Delta::Added(f(s)),
            freq: 1,
        });
        keys.push(key);
    }
    let states = keys
        .iter()
        .enumerate()
        .map(|(i, key)| StateInfo {
            key: key.clone(),
            visits: 1,
            correct: 1,
            errors: 0,
            goal: i == added.len(),
        })
        .collect();
    InteractionNetwork::from_parts(pid, fs(givens), f(conclusion), RuleId::ALL.to_vec(), states, transitions).unwrap()
}

/// Three-state chain: the givens, then `F`, then the conclusion `G&~H`.
pub fn simp_mp_chain() -> InteractionNetwork {
    chain("chain", &["I&F", "F->G&~H"], "G&~H", &["F", "G&~H"])
}

/// The chain with an extra given `J` and conclusion `G&~H&J`, whose only
/// state two moves ahead of the start adds `G&~H`.
pub fn waypoint_chain() -> InteractionNetwork {
    chain("waypoint", &["I&F", "F->G&~H", "J"], "G&~H&J", &["F", "G&~H", "G&~H&J"])
}

pub fn waypoint_problem() -> ProblemDef {
    problem(
        "waypoint",
        &["I&F", "F->G&~H", "J"],
        "G&~H&J",
        &[
            (&["I&F"], RuleId::Simp, "F"),
            (&["F->G&~H", "F"], RuleId::MP, "G&~H"),
            (&["G&~H", "J"], RuleId::Conj, "G&~H&J"),
        ],
    )
}

fn step(state: &mut ProofState, premises: &[&str], rule: RuleId, conclusion: &str) -> StepOutcome {
    let ids = state.ids_by_statement();
    let premises: Vec<_> = premises.iter().map(|p| ids[&f(p)]).collect();
    state.attempt_step(&premises, rule, Some(&f(conclusion))).unwrap()
}

/// A completed proof in which the hint `I` was justified by Simp but plays
/// no part in reaching the conclusion.
pub fn justified_not_adopted() -> ProofState {
    let mut state = new_proof(&waypoint_problem()).unwrap();
    state
        .add_hint_node(
            f("I"),
            HintMeta {
                hint_type: HintType::NextStep,
                source: HintSource::Unsolicited,
                depth: 1,
            },
        )
        .unwrap();
    step(&mut state, &["I&F"], RuleId::Simp, "I");
    step(&mut state, &["I&F"], RuleId::Simp, "F");
    step(&mut state, &["F->G&~H", "F"], RuleId::MP, "G&~H");
    step(&mut state, &["G&~H", "J"], RuleId::Conj, "G&~H&J");
    assert!(state.is_complete());
    state
}

/// Hand-labelled traces for the attempted-hint rule.
pub struct AttemptedCase {
    pub name: &'static str,
    pub hint_type: HintType,
    pub hint: &'static str,
    pub targets: Vec<Option<&'static str>>,
    pub attempted: bool,
}

pub fn attempted_cases() -> Vec<AttemptedCase> {
    use HintType::{NextStep as NS, Waypoint as WP};
    let case = |name, hint_type, hint, targets: &[Option<&'static str>], attempted| AttemptedCase {
        name,
        hint_type,
        hint,
        targets: targets.to_vec(),
        attempted,
    };
    vec![
        case("ns two of three", NS, "F", &[Some("F|K"), Some("F"), Some("J")], true),
        case("ns three of three", NS, "F", &[Some("F"), Some("F&I"), Some("~F")], true),
        case("ns one of three", NS, "F", &[Some("F|K"), Some("J"), Some("I")], false),
        case("ns window ignores later steps", NS, "F", &[Some("J"), Some("K"), Some("F"), Some("F")], false),
        case("ns none", NS, "F", &[Some("J"), Some("K"), Some("I")], false),
        case("ns error without claim", NS, "F", &[None, Some("F"), None], false),
        case("ns restart at once", NS, "F", &[], false),
        case("ns one step overlapping", NS, "F", &[Some("F")], true),
        case("ns two steps split", NS, "F", &[Some("F"), Some("J")], false),
        case("ns two steps both", NS, "F", &[Some("F|J"), Some("~F")], true),
        case("wp three of five", WP, "G&~H", &[Some("G"), Some("I"), Some("~H"), Some("J"), Some("H|K")], true),
        case("wp two of five", WP, "G&~H", &[Some("G"), Some("I"), Some("J"), Some("K"), Some("H")], false),
        case("wp one of five", WP, "G&~H", &[Some("G"), Some("I"), Some("J"), Some("K"), Some("I&J")], false),
        case("wp five of five", WP, "G&~H", &[Some("G"), Some("H"), Some("~H"), Some("G|H"), Some("G&~H")], true),
        case("wp short majority", WP, "G&~H", &[Some("G"), Some("H"), Some("I")], true),
        case("wp short tie", WP, "G&~H", &[Some("G"), Some("I")], false),
        case("wp empty", WP, "G&~H", &[], false),
        case("wp window ignores later steps", WP, "G&~H", &[Some("I"), Some("J"), Some("K"), Some("G"), Some("I"), Some("H"), Some("G")], false),
    ]
}

/// Final proof states of `n` completed simulated attempts over `problems`,
/// alternating hint conditions so that some proofs carry hint nodes.
pub fn completed_proofs(problems: &[ProblemDef], networks: &Arc<NetworkLibrary>, n: usize, seed: u64) -> Vec<ProofState> {
    use prooftutor_core::session::{replay, AttemptOutcome};
    use prooftutor_core::simulator::{simulate_attempt, student_seed, StudentPolicy};
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while out.len() < n {
        let policy = StudentPolicy {
            name: "explorer".into(),
            p_follow: 0.7,
            p_err: 0.1,
            beta: 0.3,
            p_giveup_per_step: 0.0,
            seed: student_seed(seed, i),
        };
        let condition = [HintType::NextStep, HintType::Waypoint][i % 2];
        let p = &problems[i % problems.len()];
        let log = simulate_attempt(&policy, p, Some(condition), networks, &format!("proof-{i}")).unwrap();
        for a in replay(&log).unwrap().attempts {
            if a.outcome == AttemptOutcome::Completed && out.len() < n {
                out.push(a.state);
            }
        }
        i += 1;
    }
    out
}
