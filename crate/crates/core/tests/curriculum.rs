use std::path::PathBuf;

use prooftutor_core::logic::RuleId;
use prooftutor_core::proof::{new_proof, StepOutcome};
use prooftutor_core::session::{Curriculum, Phase};
use prooftutor_core::simulator::plan_derivation;

fn curriculum() -> Curriculum {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../curriculum");
    Curriculum::load(&dir).unwrap()
}

#[test]
fn standard_shape() {
    let c = curriculum();
    assert!(c.config.has_standard_shape());
    assert_eq!(c.sequence().len(), 26);
}

#[test]
fn expert_scripts_replay_to_completion() {
    for (phase, p) in curriculum().sequence() {
        let mut state = new_proof(p).unwrap();
        for (i, step) in p.expert.iter().enumerate() {
            let ids = state.ids_by_statement();
            let premises: Vec<_> = step.premises.iter().map(|s| ids[s]).collect();
            let outcome = state.attempt_step(&premises, step.rule, Some(&step.conclusion)).unwrap();
            assert!(matches!(outcome, StepOutcome::Derived { .. }), "{} step {i}: {outcome:?}", p.id);
        }
        assert!(state.is_complete(), "{}", p.id);
        assert_eq!(state.error_count, 0);
        assert_eq!(p.expert_length, p.expert.len(), "{}", p.id);
        if phase != Phase::Intro {
            assert!((5..=8).contains(&p.expert_length), "{}", p.id);
        }
    }
}

#[test]
fn expert_scripts_have_no_short_cut() {
    for (phase, p) in curriculum().sequence() {
        if phase == Phase::Intro {
            continue;
        }
        assert!(
            plan_derivation(&p.givens, &p.conclusion, &RuleId::ALL, 3).is_none(),
            "{} solvable in 3 steps",
            p.id
        );
    }
}
