use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use prooftutor_core::analytics::{
    assign_conditions, classify_attempted, cohort_rows, compute_metrics, correlate, csv_header, median_split,
    metrics_by_student, score, to_csv, Group, StatsError,
};
use prooftutor_core::hints::{HintType, NetworkLibrary, RewardConfig};
use prooftutor_core::session::{read_jsonl, Phase, Session, SessionLog};
use prooftutor_core::simulator::{simulate_attempt, StudentPolicy};
use prooftutor_testkit::fixtures::{self, attempted_cases, chain, f, waypoint_problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn attempted_rule_matches_hand_labels() {
    for case in attempted_cases() {
        let targets: Vec<_> = case.targets.iter().map(|t| t.map(f)).collect();
        assert_eq!(classify_attempted(case.hint_type, &f(case.hint), &targets), case.attempted, "{}", case.name);
    }
}

#[test]
fn score_anchors() {
    assert_eq!(score(0.0, 0.0, 1.0).unwrap(), 1.0);
    assert_eq!(score(1.0, 1.0, 0.0).unwrap(), 0.0);
    assert_eq!(score(0.5, 0.5, 0.5).unwrap(), 0.5);
    assert!(matches!(score(0.0, -0.1, 0.0), Err(StatsError::OutOfRange { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn score_is_monotone(t in 0.0..=1.0f64, s in 0.0..=1.0f64, a in 0.0..=1.0f64, d in 0.0..=1.0f64) {
        let base = score(t, s, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(score((t - d).max(0.0), s, a).unwrap() >= base);
        prop_assert!(score(t, (s - d).max(0.0), a).unwrap() >= base);
        prop_assert!(score(t, s, (a + d).min(1.0)).unwrap() >= base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn median_split_halves_distinct_scores(scores in proptest::collection::btree_set(0u32..1_000_000, 114)) {
        let named: Vec<(String, f64)> = scores.iter().map(|&s| (format!("s{s}"), s as f64)).collect();
        let groups = median_split(&named).unwrap();
        let high = groups.values().filter(|g| **g == Group::High).count();
        prop_assert!(high.abs_diff(57) <= 1);
    }
}

fn cohort(n: usize, seed: u64) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| (format!("s{i:03}"), rng.random::<f64>())).collect()
}

#[test]
fn stratified_assignment() {
    let four = vec![("a".to_string(), 0.1), ("b".into(), 0.2), ("c".into(), 0.8), ("d".into(), 0.9)];
    let a = assign_conditions(&four, &[HintType::NextStep, HintType::Waypoint], 1).unwrap();
    assert_ne!(a["a"], a["b"]);
    assert_ne!(a["c"], a["d"]);
    let a = assign_conditions(&cohort(143, 2), &[HintType::NextStep, HintType::Waypoint], 7).unwrap();
    let ns = a.values().filter(|c| **c == HintType::NextStep).count();
    assert!(ns == 71 || ns == 72);
    assert!(matches!(
        assign_conditions(&cohort(1, 1), &["ns", "wp"], 0),
        Err(StatsError::TooFewStudents { .. })
    ));
    for seed in 0..50 {
        let scores = cohort(100 + seed as usize, seed);
        let a = assign_conditions(&scores, &["ns", "wp"], seed).unwrap();
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for (s, v) in &scores {
            let e = sums.entry(a[s]).or_default();
            e.0 += v;
            e.1 += 1;
        }
        let means: Vec<f64> = sums.values().map(|(s, n)| s / *n as f64).collect();
        assert!((means[0] - means[1]).abs() < 0.05, "seed {seed}: {means:?}");
    }
}

#[test]
fn median_split_examples() {
    let named = |v: &[f64]| v.iter().map(|x| (format!("{x}"), *x)).collect::<Vec<_>>();
    let g = median_split(&named(&[0.2, 0.4, 0.6, 0.8])).unwrap();
    assert_eq!((g["0.2"], g["0.4"], g["0.6"], g["0.8"]), (Group::Low, Group::Low, Group::High, Group::High));
}

#[test]
fn correlation_p_value_matches_closed_form() {
    // with two degrees of freedom the two-sided p-value is 1 - t / sqrt(t^2 + 2)
    let c = correlate(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
    let t = c.r * (2.0 / (1.0 - c.r * c.r)).sqrt();
    assert!((c.p - (1.0 - t / (t * t + 2.0).sqrt())).abs() < 1e-9);
    assert!((c.p - 0.4).abs() < 1e-9);
    assert!(matches!(correlate(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::DegenerateInput(_))));
}

fn hinted_off_path_session() -> SessionLog {
    let mut net = chain("waypoint", &["I&F", "F->G&~H", "J"], "G&~H&J", &["I", "F", "G&~H", "G&~H&J"]);
    net.solve(&RewardConfig::default()).unwrap();
    let mut lib = NetworkLibrary::new();
    lib.insert(net);
    let p = waypoint_problem();
    let mut s = Session::new("fig", "u", Some(HintType::NextStep), Arc::new(lib));
    s.start_problem(&p, Phase::Training, false, 0, 0).unwrap();
    assert_eq!(s.request_hint(1).unwrap().hint.statement, f("I"));
    let steps: [(&[&str], _, &str); 4] = [
        (&["I&F"], prooftutor_core::logic::RuleId::Simp, "I"),
        (&["I&F"], prooftutor_core::logic::RuleId::Simp, "F"),
        (&["F->G&~H", "F"], prooftutor_core::logic::RuleId::MP, "G&~H"),
        (&["G&~H", "J"], prooftutor_core::logic::RuleId::Conj, "G&~H&J"),
    ];
    for (i, (prem, rule, c)) in steps.into_iter().enumerate() {
        let ids = s.current().unwrap().state.ids_by_statement();
        let premises: Vec<_> = prem.iter().map(|x| ids[&f(x)]).collect();
        s.step(&premises, rule, Some(&f(c)), 60_000 * (i as u64 + 1)).unwrap();
    }
    s.into_log()
}

#[test]
fn justified_but_not_adopted() {
    let m = compute_metrics(&[hinted_off_path_session()]).unwrap();
    assert_eq!((m.hints.total_added, m.hints.justified, m.hints.adopted), (1, 1, 0));
    assert_eq!(m.hints.justification_rate, 100.0);
    assert_eq!(m.hints.adoption_rate, 0.0);
    assert_eq!(m.hints.steps_until_justified, 1.0);
    let training = m.phase(Phase::Training);
    assert_eq!((training.total_steps, training.accuracy, training.total_requests), (4, 100.0, 1));
    assert_eq!(training.total_time, 4.0);
}

#[test]
fn metrics_depend_only_on_the_log() {
    let logs = fixtures::corpus(&fixtures::training_problems()[..2], 4);
    let text = prooftutor_core::session::logs_to_jsonl(&logs);
    let reread = read_jsonl(text.as_bytes(), None).unwrap();
    assert_eq!(metrics_by_student(&logs).unwrap(), metrics_by_student(&reread).unwrap());
    for m in metrics_by_student(&logs).unwrap() {
        let h = m.hints;
        assert_eq!(h.total_added, h.justified + h.total_unused);
        assert_eq!(h.total_unused, h.gave_up + h.solved_without);
        assert!(h.adopted <= h.justified);
    }
}

#[test]
fn ideal_next_step_students_justify_in_one_step() {
    let problems = fixtures::training_problems();
    let lib = fixtures::library(&problems, 31);
    let logs: Vec<SessionLog> = problems
        .iter()
        .enumerate()
        .map(|(i, p)| simulate_attempt(&StudentPolicy::ideal(i as u64), p, Some(HintType::NextStep), &lib, &format!("i{i}")).unwrap())
        .collect();
    let m = compute_metrics(&logs).unwrap();
    assert!(m.hints.total_added > 0);
    assert_eq!(m.hints.steps_until_justified, 1.0);
    assert_eq!(m.hints.justification_rate, 100.0);
}

#[test]
fn csv_report_columns() {
    let header = csv_header();
    assert_eq!(&header[..4], ["student", "condition", "group", "score"]);
    assert!(header.contains(&"posttest_total_time".to_string()));
    assert_eq!(header.last().unwrap(), "steps_before");
    let rows = cohort_rows(vec![compute_metrics(&[hinted_off_path_session()]).unwrap()]).unwrap();
    let csv = to_csv(&rows);
    let line = csv.lines().nth(1).unwrap();
    assert!(line.starts_with("u,NS,,"), "{line}");
    let fields: Vec<&str> = line.split(',').collect();
    let col = |name: &str| fields[header.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("steps_until_justified"), "1.0");
    assert_eq!(col("justification_rate"), "100.0");
    assert_eq!(col("training_total_steps"), "4");
}
