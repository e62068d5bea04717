use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::parse::{parse, ParseError};

/// A propositional formula over single-letter atoms `A`..`Z`.
///
/// Equality is structural: `I&F` and `F&I` are different formulas.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(char),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

/// Binary connectives, ordered loosest-binding first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connective {
    Iff,
    Implies,
    Or,
    And,
}

impl Connective {
    pub(crate) fn precedence(self) -> u8 {
        match self {
            Connective::Iff => 1,
            Connective::Implies => 2,
            Connective::Or => 3,
            Connective::And => 4,
        }
    }

    pub(crate) fn right_assoc(self) -> bool {
        matches!(self, Connective::Implies)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Connective::Iff => "<->",
            Connective::Implies => "->",
            Connective::Or => "|",
            Connective::And => "&",
        }
    }

    pub(crate) fn build(self, lhs: Formula, rhs: Formula) -> Formula {
        let (l, r) = (Box::new(lhs), Box::new(rhs));
        match self {
            Connective::Iff => Formula::Iff(l, r),
            Connective::Implies => Formula::Implies(l, r),
            Connective::Or => Formula::Or(l, r),
            Connective::And => Formula::And(l, r),
        }
    }
}

const NOT_PRECEDENCE: u8 = 5;

impl Formula {
    /// Panics unless `letter` is an ASCII uppercase letter.
    pub fn atom(letter: char) -> Formula {
        assert!(letter.is_ascii_uppercase(), "atom letters are A-Z, got {letter:?}");
        Formula::Atom(letter)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    /// The top-level binary connective and its operands, if any.
    pub fn binary(&self) -> Option<(Connective, &Formula, &Formula)> {
        match self {
            Formula::And(l, r) => Some((Connective::And, l, r)),
            Formula::Or(l, r) => Some((Connective::Or, l, r)),
            Formula::Implies(l, r) => Some((Connective::Implies, l, r)),
            Formula::Iff(l, r) => Some((Connective::Iff, l, r)),
            Formula::Atom(_) | Formula::Not(_) => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) => u8::MAX,
            Formula::Not(_) => NOT_PRECEDENCE,
            other => other.binary().map(|(c, _, _)| c.precedence()).unwrap_or(u8::MAX),
        }
    }

    /// Distinct atom letters, sorted.
    pub fn atoms(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<char>) {
        match self {
            Formula::Atom(c) => {
                out.insert(*c);
            }
            Formula::Not(inner) => inner.collect_atoms(out),
            other => {
                if let Some((_, l, r)) = other.binary() {
                    l.collect_atoms(out);
                    r.collect_atoms(out);
                }
            }
        }
    }

    /// Number of connective and atom nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(inner) => 1 + inner.size(),
            other => other.binary().map(|(_, l, r)| 1 + l.size() + r.size()).unwrap_or(1),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(inner) => 1 + inner.depth(),
            other => other.binary().map(|(_, l, r)| 1 + l.depth().max(r.depth())).unwrap_or(0),
        }
    }

    /// Every subformula including `self`, pre-order.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let f = out[i];
            match f {
                Formula::Atom(_) => {}
                Formula::Not(inner) => out.push(inner),
                other => {
                    if let Some((_, l, r)) = other.binary() {
                        out.push(l);
                        out.push(r);
                    }
                }
            }
            i += 1;
        }
        out
    }

    /// Truth value under `assignment`, indexed by `letter - 'A'`.
    pub fn eval(&self, assignment: &[bool; 26]) -> bool {
        match self {
            Formula::Atom(c) => assignment[(*c as u8 - b'A') as usize],
            Formula::Not(inner) => !inner.eval(assignment),
            Formula::And(l, r) => l.eval(assignment) && r.eval(assignment),
            Formula::Or(l, r) => l.eval(assignment) || r.eval(assignment),
            Formula::Implies(l, r) => !l.eval(assignment) || r.eval(assignment),
            Formula::Iff(l, r) => l.eval(assignment) == r.eval(assignment),
        }
    }

    /// Canonical ASCII rendering with the fewest parentheses the grammar allows.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write_into(&mut out);
        out
    }

    fn write_into(&self, out: &mut String) {
        match self {
            Formula::Atom(c) => out.push(*c),
            Formula::Not(inner) => {
                out.push('~');
                write_operand(inner, inner.precedence() < NOT_PRECEDENCE, out);
            }
            other => {
                let (conn, l, r) = other.binary().expect("binary connective");
                let p = conn.precedence();
                let lp = l.precedence();
                let rp = r.precedence();
                let left_parens = lp < p || (lp == p && conn.right_assoc());
                let right_parens = rp < p || (rp == p && !conn.right_assoc());
                write_operand(l, left_parens, out);
                out.push_str(conn.symbol());
                write_operand(r, right_parens, out);
            }
        }
    }

    /// Rendering with Unicode connectives, for display only.
    pub fn render_unicode(&self) -> String {
        self.render()
            .replace("<->", "↔")
            .replace("->", "→")
            .replace('&', "∧")
            .replace('|', "∨")
            .replace('~', "¬")
    }
}

fn write_operand(f: &Formula, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        f.write_into(out);
        out.push(')');
    } else {
        f.write_into(out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", self.render())
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn render_examples() {
        assert_eq!(Formula::and(Formula::atom('I'), Formula::atom('F')).render(), "I&F");
        let fig5 = Formula::implies(
            Formula::atom('F'),
            Formula::and(Formula::atom('G'), Formula::not(Formula::atom('H'))),
        );
        assert_eq!(fig5.render(), "F->G&~H");
        assert_eq!(Formula::atom('J').render(), "J");
    }

    #[test]
    fn associativity_parens() {
        assert_eq!(f("(A->B)->C").render(), "(A->B)->C");
        assert_eq!(f("A->(B->C)").render(), "A->B->C");
        assert_eq!(f("A&(B&C)").render(), "A&(B&C)");
        assert_eq!(f("(A&B)&C").render(), "A&B&C");
        assert_eq!(f("~(A|B)").render(), "~(A|B)");
        assert_eq!(f("~~A").render(), "~~A");
    }

    #[test]
    fn atoms_and_size() {
        let g = f("F->G&~H");
        assert_eq!(g.atoms().into_iter().collect::<String>(), "FGH");
        assert_eq!(g.size(), 6);
        assert_eq!(g.depth(), 3);
        assert_eq!(g.subformulas().len(), 6);
    }

    #[test]
    fn unicode_display() {
        assert_eq!(f("F->G&~H").render_unicode(), "F→G∧¬H");
    }
}
