use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use prooftutor_core::hints::{
    build_network, next_step_hint, read_snapshot, value_iterate, waypoint_hint, write_snapshot, HintError, HintType,
    InteractionNetwork, NetworkLibrary, RewardConfig,
};
use prooftutor_core::logic::RuleId;
use prooftutor_core::proof::StateKey;
use prooftutor_core::session::{Phase, Session, SessionLog};
use prooftutor_testkit::fixtures::{self, f, fs, problem, simp_mp_chain, waypoint_chain};
use prooftutor_testkit::networks::random_network;
use prooftutor_testkit::oracles::{one_step_brute_force, waypoint_oracle};
use prooftutor_testkit::sessions::fuzz_session;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solved(mut net: InteractionNetwork) -> InteractionNetwork {
    net.solve(&RewardConfig::default()).unwrap();
    net
}

#[test]
fn chain_values_match_hand_bellman() {
    let net = solved(simp_mp_chain());
    let cfg = RewardConfig::default();
    let v2 = cfg.goal_reward;
    let v1 = cfg.step_cost + cfg.discount * v2;
    let v0 = cfg.step_cost + cfg.discount * v1;
    let key = |s: &[&str]| StateKey::from_statements(&fs(s));
    let got = |k: StateKey| net.value(&k).unwrap();
    assert!((got(key(&["I&F", "F->G&~H"])) - v0).abs() < 1e-9);
    assert!((got(key(&["I&F", "F->G&~H", "F"])) - v1).abs() < 1e-9);
    assert_eq!(got(key(&["I&F", "F->G&~H", "F", "G&~H"])), v2);
    assert_eq!((format!("{v0:.1}"), format!("{v1:.1}")), ("79.1".into(), "89.0".into()));
}

#[test]
fn next_step_hint_on_chain() {
    let net = solved(simp_mp_chain());
    let hint = next_step_hint(&net, &fs(&["I&F", "F->G&~H"])).unwrap();
    assert_eq!(hint.statement, f("F"));
    assert_eq!(hint.depth, 1);
    assert!((hint.value.unwrap() - 89.0).abs() < 1e-9);
    assert!(matches!(
        next_step_hint(&net, &fs(&["I&F", "F->G&~H", "F", "G&~H"])),
        Err(HintError::AlreadySolved)
    ));
}

#[test]
fn waypoint_two_moves_ahead() {
    let net = solved(waypoint_chain());
    let hint = waypoint_hint(&net, &fs(&["I&F", "F->G&~H", "J"])).unwrap();
    assert_eq!((hint.statement, hint.hint_type, hint.depth), (f("G&~H"), HintType::Waypoint, 2));
    // one move from the goal only the conclusion is ahead, so a next-step hint stands in
    let fallback = waypoint_hint(&net, &fs(&["I&F", "F->G&~H", "J", "F", "G&~H"]));
    assert!(matches!(fallback, Err(HintError::NoHintAvailable)));
    let near = waypoint_hint(&net, &fs(&["I&F", "F->G&~H", "J", "F"])).unwrap();
    assert_eq!((near.statement, near.hint_type, near.depth), (f("G&~H"), HintType::NextStep, 1));
}

#[test]
fn unknown_states_fall_back_to_the_latest_known_prefix() {
    let net = solved(simp_mp_chain());
    let hint = next_step_hint(&net, &fs(&["I&F", "F->G&~H", "I"])).unwrap();
    assert_eq!((hint.statement, hint.dropped), (f("F"), 1));
}

fn scripted_log(sid: &str) -> SessionLog {
    let p = problem(
        "p",
        &["I&F", "F->G&H"],
        "G",
        &[
            (&["I&F"], RuleId::Simp, "F"),
            (&["F->G&H", "F"], RuleId::MP, "G&H"),
            (&["G&H"], RuleId::Simp, "G"),
        ],
    );
    let mut s = Session::new(sid, sid, None, Arc::new(NetworkLibrary::new()));
    s.start_problem(&p, Phase::Training, false, 1, 0).unwrap();
    for (i, step) in p.expert.iter().enumerate() {
        let ids = s.current().unwrap().state.ids_by_statement();
        let premises: Vec<_> = step.premises.iter().map(|x| ids[x]).collect();
        s.step(&premises, step.rule, Some(&step.conclusion), 1_000 * (i as u64 + 1)).unwrap();
    }
    s.into_log()
}

#[test]
fn identical_attempts_share_states() {
    let net = build_network(&[scripted_log("a"), scripted_log("b")], "p").unwrap();
    assert_eq!(net.states().len(), 4);
    assert_eq!(net.transitions().len(), 3);
    assert!(net.transitions().iter().all(|t| t.freq == 2));
    assert!(net.states().values().all(|s| s.visits == 2 && s.correct == 2));
    assert!(matches!(build_network(&[scripted_log("a")], "q"), Err(HintError::EmptyCorpus(_))));
}

#[test]
fn visits_are_conserved() {
    let problems = fixtures::training_problems();
    let lib = Arc::new(NetworkLibrary::new());
    let logs: Vec<SessionLog> = (0..40).map(|seed| fuzz_session(seed, &problems[..4], None, &lib, 60).log).collect();
    let attempts = fixtures::attempts(&logs);
    for p in &problems[..4] {
        let Ok(net) = prooftutor_core::hints::build_network_from_attempts(&attempts, &p.id) else { continue };
        let mut expected: BTreeMap<&StateKey, u64> = BTreeMap::new();
        for a in attempts.iter().filter(|a| a.pid == p.id) {
            *expected.entry(&a.trace.keys[0]).or_default() += 1;
        }
        for t in net.transitions() {
            *expected.entry(&t.dst).or_default() += t.freq;
        }
        for (key, info) in net.states() {
            assert_eq!(info.visits, expected[key], "{key}");
            assert!(info.correct <= info.visits);
        }
    }
}

#[test]
fn snapshot_round_trip() {
    let problems = fixtures::training_problems();
    let lib = fixtures::library(&problems[..3], 9);
    for pid in lib.problem_ids() {
        let net = lib.get(pid).unwrap();
        let text = write_snapshot(net);
        let back = read_snapshot(&text).unwrap();
        assert_eq!(&back, net);
        assert_eq!(write_snapshot(&back), text);
    }
    let err = read_snapshot("prooftutor-network 1\nproblem\tp\nstate\tA\t0\t1\t0\t0\t-\n").unwrap_err();
    assert_eq!(err.line, 3);
}

#[test]
fn random_networks_converge_to_the_bellman_fixed_point() {
    let cfg = RewardConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let net = random_network(&mut rng, 10_000, 30, 12);
    assert!(net.states().len() >= 10_000);
    let t = Instant::now();
    let report = value_iterate(&net, &cfg).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0, "{:?}", t.elapsed());
    assert!(report.residual < cfg.tolerance);
    for (key, info) in net.states() {
        let v = report.values[key];
        let best = net.adds_from(key).map(|t| report.values[&t.dst]).fold(f64::NEG_INFINITY, f64::max);
        let expected = if info.goal {
            cfg.goal_reward
        } else if best == f64::NEG_INFINITY {
            cfg.dead_end()
        } else {
            cfg.step_cost + cfg.error_penalty * info.err_frac() + cfg.discount * best
        };
        assert!((v - expected).abs() < 1e-5, "{key}: {v} vs {expected}");
    }
}

#[test]
fn iteration_cap_is_reported() {
    let cfg = RewardConfig {
        max_iterations: 1,
        ..RewardConfig::default()
    };
    assert!(matches!(value_iterate(&simp_mp_chain(), &cfg), Err(HintError::NoConvergence { iterations: 1, .. })));
}

#[test]
fn corpus_hints_obey_their_definitions() {
    let problems = fixtures::training_problems();
    let lib = fixtures::library(&problems[..6], 13);
    for pid in lib.problem_ids() {
        let net = lib.get(pid).unwrap();
        for (key, info) in net.states() {
            if info.goal {
                continue;
            }
            let statements = key.statements();
            if let Ok(h) = next_step_hint(net, &statements) {
                assert!(one_step_brute_force(&statements, &h.statement, &net.catalog), "{pid} {key}: {}", h.statement);
            }
            match (waypoint_hint(net, &statements), waypoint_oracle(net, &statements)) {
                (Ok(h), Some((s, d))) => {
                    assert_eq!((h.hint_type, &h.statement, h.depth), (HintType::Waypoint, &s, d), "{pid} {key}");
                    assert!((2..=3).contains(&h.depth));
                }
                (Ok(h), None) => assert_eq!(h.hint_type, HintType::NextStep, "{pid} {key}"),
                (Err(_), oracle) => assert_eq!(oracle, None, "{pid} {key}"),
            }
        }
    }
}
