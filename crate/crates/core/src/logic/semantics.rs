use std::collections::BTreeSet;

use super::formula::Formula;

pub const MAX_ENTAILMENT_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("too many atoms for truth-table check: {0} (limit {MAX_ENTAILMENT_ATOMS})")]
pub struct TooManyAtoms(pub usize);

/// Truth-table entailment: every assignment satisfying all `premises`
/// satisfies `conclusion`.
pub fn entails(premises: &[Formula], conclusion: &Formula) -> Result<bool, TooManyAtoms> {
    let mut letters = BTreeSet::new();
    for p in premises {
        p.collect_atoms(&mut letters);
    }
    conclusion.collect_atoms(&mut letters);
    if letters.len() > MAX_ENTAILMENT_ATOMS {
        return Err(TooManyAtoms(letters.len()));
    }
    let letters: Vec<usize> = letters.into_iter().map(|c| (c as u8 - b'A') as usize).collect();
    let mut assignment = [false; 26];
    for bits in 0u32..(1u32 << letters.len()) {
        for (k, &slot) in letters.iter().enumerate() {
            assignment[slot] = bits & (1 << k) != 0;
        }
        if premises.iter().all(|p| p.eval(&assignment)) && !conclusion.eval(&assignment) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff `a` and `b` agree under every assignment.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool, TooManyAtoms> {
    Ok(entails(std::slice::from_ref(a), b)? && entails(std::slice::from_ref(b), a)?)
}
