use std::sync::Arc;

use prooftutor_core::hints::NetworkLibrary;
use prooftutor_core::session::{logs_to_jsonl, replay, AttemptOutcome, EventBody};
use prooftutor_core::simulator::{generate_corpus, simulate_attempt, student_seed, SimError, StudentPolicy, STEP_CAP};
use prooftutor_testkit::fixtures::{self, problem};
use prooftutor_core::logic::{validate_derivation, RuleId};

fn policy(p_err: f64, giveup: f64, seed: u64) -> StudentPolicy {
    StudentPolicy {
        name: "t".into(),
        p_follow: 0.5,
        p_err,
        beta: 0.5,
        p_giveup_per_step: giveup,
        seed,
    }
}

#[test]
fn corpus_is_deterministic() {
    let problems = &fixtures::training_problems()[..3];
    let a = logs_to_jsonl(&fixtures::corpus(problems, 42));
    let b = logs_to_jsonl(&fixtures::corpus(problems, 42));
    assert_eq!(a, b);
    assert_ne!(a, logs_to_jsonl(&fixtures::corpus(problems, 43)));
    assert!(generate_corpus(&[], problems, 1).unwrap().is_empty());
}

#[test]
fn every_problem_gets_a_solution_and_every_step_is_sound() {
    let problems = fixtures::training_problems();
    let logs = fixtures::corpus(&problems, 5);
    assert_eq!(logs.len(), fixtures::policy_mix().students());
    let attempts = fixtures::attempts(&logs);
    for p in &problems {
        assert!(attempts.iter().any(|a| a.pid == p.id && a.outcome == AttemptOutcome::Completed), "{}", p.id);
    }
    assert!(attempts.iter().any(|a| a.outcome == AttemptOutcome::Skipped));
    for a in &attempts {
        for s in a.steps.iter().filter(|s| s.valid) {
            assert_eq!(validate_derivation(s.rule, &s.premises, s.statement.as_ref().unwrap()), Ok(true));
        }
    }
}

#[test]
fn accuracy_tracks_the_error_rate() {
    let problems = fixtures::training_problems();
    let lib = Arc::new(NetworkLibrary::new());
    for (p_err, lo, hi) in [(0.0, 1.0, 1.0), (0.3, 0.6, 0.8)] {
        let (mut valid, mut total) = (0, 0);
        for i in 0..500 {
            let pol = policy(p_err, 0.0, student_seed(9, i));
            let log = simulate_attempt(&pol, &problems[i % problems.len()], None, &lib, "acc").unwrap();
            for a in replay(&log).unwrap().attempts {
                total += a.steps.len();
                valid += a.steps.iter().filter(|s| s.valid).count();
            }
        }
        let acc = valid as f64 / total as f64;
        assert!((lo..=hi).contains(&acc), "p_err {p_err}: accuracy {acc}");
    }
}

#[test]
fn certain_give_up_skips_at_once() {
    let p = &fixtures::training_problems()[0];
    let log = simulate_attempt(&policy(0.0, 1.0, 1), p, None, &Arc::new(NetworkLibrary::new()), "g").unwrap();
    let bodies: Vec<_> = log.events().iter().map(|e| &e.body).collect();
    assert_eq!(bodies.len(), 2);
    assert!(matches!(bodies[1], EventBody::Skip {}));
}

#[test]
fn attempts_stop_at_the_step_cap() {
    let p = &fixtures::training_problems()[0];
    let lib = Arc::new(NetworkLibrary::new());
    for i in 0..50 {
        let mut pol = policy(0.9, 0.0, i);
        pol.beta = 0.0;
        let log = simulate_attempt(&pol, p, None, &lib, "cap").unwrap();
        let a = &replay(&log).unwrap().attempts[0];
        assert!(a.steps.len() <= STEP_CAP);
    }
}

#[test]
fn problems_need_expert_scripts() {
    let mut p = problem("bare", &["A"], "A|B", &[(&["A"], RuleId::Add, "A|B")]);
    p.expert.clear();
    let lib = Arc::new(NetworkLibrary::new());
    assert!(matches!(simulate_attempt(&policy(0.0, 0.0, 1), &p, None, &lib, "x"), Err(SimError::NoExpertScript(_))));
}
