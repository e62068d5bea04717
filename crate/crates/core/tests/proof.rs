use proptest::prelude::*;
use prooftutor_core::logic::{Formula, RuleId};
use prooftutor_core::proof::{
    color_nodes, new_proof, CorpusNodeStats, NodeColor, NodeKind, ProofError, StateKey, StepOutcome,
    DEFAULT_GREEN_THRESHOLD,
};
use prooftutor_testkit::fixtures::{self, f, justified_not_adopted, waypoint_problem};
use prooftutor_testkit::formulas::arb_formula;
use prooftutor_testkit::oracles::necessary_by_deletion;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn state_key_ignores_order_and_repeats(
        statements in proptest::collection::vec(arb_formula("ABCDEF", 3), 1..8),
        seed in any::<u64>(),
    ) {
        let key = StateKey::from_statements(&statements);
        let mut shuffled = statements.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        shuffled.push(statements[(seed as usize / 7) % n].clone());
        prop_assert_eq!(StateKey::from_statements(&shuffled), key.clone());
        let mut rendered: Vec<String> = statements.iter().map(Formula::render).collect();
        rendered.sort();
        rendered.dedup();
        let back: Vec<String> = key.statements().iter().map(Formula::render).collect();
        prop_assert_eq!(back, rendered);
    }
}

#[test]
fn necessary_nodes_match_deletion_oracle() {
    let problems = fixtures::training_problems();
    let lib = fixtures::library(&problems, 3);
    let proofs = fixtures::completed_proofs(&problems, &lib, 300, 5);
    let mut with_hints = 0;
    for proof in &proofs {
        assert_eq!(proof.necessary_nodes().unwrap(), necessary_by_deletion(proof));
        with_hints += proof.nodes().iter().any(|n| n.kind == NodeKind::Hint) as usize;
    }
    assert!(with_hints > 0);
}

#[test]
fn justified_hint_off_the_path_is_not_necessary() {
    let proof = justified_not_adopted();
    let hint = proof.nodes().iter().find(|n| n.kind == NodeKind::Hint).unwrap();
    assert!(hint.is_justified());
    let needed = proof.necessary_nodes().unwrap();
    assert!(!needed.contains(&hint.id));
    assert_eq!(needed, necessary_by_deletion(&proof));
}

#[test]
fn derivation_flow() {
    let mut s = new_proof(&waypoint_problem()).unwrap();
    let ids = s.ids_by_statement();
    let (i_f, rule) = (ids[&f("I&F")], RuleId::Simp);
    match s.attempt_step(&[i_f], rule, None).unwrap() {
        StepOutcome::NeedsInput { options: Some(opts) } => assert_eq!(opts, vec![f("F"), f("I")]),
        other => panic!("{other:?}"),
    }
    assert_eq!(s.step_count, 0);
    let out = s.attempt_step(&[i_f, ids[&f("J")]], rule, Some(&f("F"))).unwrap();
    match out {
        StepOutcome::Rejected { error } => assert_eq!(error.to_string(), "Rule requires one premise"),
        other => panic!("{other:?}"),
    }
    assert_eq!((s.step_count, s.error_count), (1, 1));
    assert!(matches!(s.attempt_step(&[i_f], rule, Some(&f("F"))).unwrap(), StepOutcome::Derived { .. }));
    assert!(matches!(s.attempt_step(&[i_f], rule, Some(&f("F"))).unwrap(), StepOutcome::Redundant { .. }));
    assert_eq!(s.attempt_step(&[i_f, i_f], RuleId::Conj, None), Err(ProofError::DuplicatePremise(i_f)));
}

#[test]
fn deletion_cascades_and_protects_givens() {
    let mut s = new_proof(&waypoint_problem()).unwrap();
    let ids = s.ids_by_statement();
    let f_step = s.attempt_step(&[ids[&f("I&F")]], RuleId::Simp, Some(&f("F"))).unwrap();
    let StepOutcome::Derived { node: f_node, .. } = f_step else { panic!() };
    s.attempt_step(&[ids[&f("F->G&~H")], f_node], RuleId::MP, Some(&f("G&~H"))).unwrap();
    assert_eq!(s.delete_node(ids[&f("J")]), Err(ProofError::ProtectedNode(ids[&f("J")])));
    let report = s.delete_node(f_node).unwrap();
    let removed: Vec<Formula> = report.removed.iter().map(|(_, st)| st.clone()).collect();
    assert_eq!(removed, vec![f("F"), f("G&~H")]);
    assert_eq!(s.state_key(), StateKey::from_statements(&fixtures::fs(&["I&F", "F->G&~H", "J"])));
}

#[test]
fn coloring_threshold_is_inclusive() {
    let problem = waypoint_problem();
    let proof = justified_not_adopted();
    let mut stats = CorpusNodeStats::from_solutions(&problem.id, [&proof]);
    stats.solutions = 10;
    stats.necessary.insert(f("F"), 3);
    stats.necessary.insert(f("G&~H"), 2);
    stats.necessary.remove(&f("I"));
    let colors = color_nodes(&proof, &stats, DEFAULT_GREEN_THRESHOLD).unwrap();
    let by = proof.ids_by_statement();
    assert_eq!(colors[&by[&f("F")]], NodeColor::Green);
    assert_eq!(colors[&by[&f("G&~H")]], NodeColor::Yellow);
    assert_eq!(colors[&by[&f("I")]], NodeColor::Gray);
}
