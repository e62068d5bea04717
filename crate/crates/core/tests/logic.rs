use proptest::prelude::*;
use prooftutor_core::logic::{entails, parse, validate_derivation, Formula, RuleId};
use prooftutor_testkit::formulas::{arb_formula, fuzz_step};
use prooftutor_testkit::oracles::tt_entails;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn render_parse_round_trip(f in arb_formula("ABCDEFGHIJKLMNOPQRSTUVWXYZ", 6)) {
        prop_assert_eq!(parse(&f.render()).unwrap(), f.clone());
        prop_assert_eq!(parse(&f.render_unicode()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn entailment_matches_oracle(
        premises in proptest::collection::vec(arb_formula("ABCDE", 3), 0..3),
        conclusion in arb_formula("ABCDE", 3),
    ) {
        prop_assert_eq!(entails(&premises, &conclusion).unwrap(), tt_entails(&premises, &conclusion));
    }

    #[test]
    fn premise_order_does_not_matter(
        a in arb_formula("ABCD", 3),
        b in arb_formula("ABCD", 3),
        c in arb_formula("ABCD", 3),
        rule in proptest::sample::select(RuleId::ALL.iter().copied().filter(|r| r.arity() == 2).collect::<Vec<_>>()),
    ) {
        let forward = validate_derivation(rule, &[a.clone(), b.clone()], &c);
        let backward = validate_derivation(rule, &[b, a], &c);
        prop_assert_eq!(forward.is_ok(), backward.is_ok());
        if let (Ok(x), Ok(y)) = (forward, backward) {
            prop_assert_eq!(x, y);
        }
    }
}

#[test]
fn fuzzed_derivations_are_sound() {
    let atoms: Vec<char> = "ABCDEFGH".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1_000 {
        let rule = RuleId::ALL[i % RuleId::ALL.len()];
        let step = fuzz_step(&mut rng, rule, &atoms);
        assert_eq!(validate_derivation(rule, &step.premises, &step.conclusion), Ok(true));
        assert!(tt_entails(&step.premises, &step.conclusion), "{rule}: {:?} / {}", step.premises, step.conclusion);
    }
}

#[test]
fn unsound_claims_are_rejected() {
    let p = |s: &str| -> Formula { s.parse().unwrap() };
    assert_eq!(validate_derivation(RuleId::MP, &[p("A->B"), p("B")], &p("A")), Err(prooftutor_core::logic::RuleError::NotApplicable { rule: RuleId::MP }));
    assert_eq!(validate_derivation(RuleId::Simp, &[p("I&F")], &p("I&F")), Ok(false));
    assert_eq!(validate_derivation(RuleId::Add, &[p("F")], &p("K|F")), Ok(false));
    assert_eq!(validate_derivation(RuleId::Add, &[p("F")], &p("F|K")), Ok(true));
    assert_eq!(validate_derivation(RuleId::DeM, &[p("A&~(B|C)")], &p("A&(~B&~C)")), Err(prooftutor_core::logic::RuleError::NotApplicable { rule: RuleId::DeM }));
}
