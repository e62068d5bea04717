//! Plain-text network snapshots.
//!
//! ```text
//! prooftutor-network 1
//! problem     <id>
//! givens      <formula>;<formula>...
//! conclusion  <formula>
//! rules       <rule>,<rule>...
//! state       <key> <goal 0|1> <visits> <correct> <errors> <value|->
//! transition  <src> <dst> <rule|-> <+statement|-statement> <freq>
//! ```
//!
//! Fields are tab separated. States and transitions are sorted by key.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::logic::{parse, Formula, RuleId};
use crate::proof::{StateKey, KEY_SEPARATOR};

use super::network::{Delta, InteractionNetwork, StateInfo, Transition};

pub const SNAPSHOT_HEADER: &str = "prooftutor-network 1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("snapshot line {line}: {reason}")]
pub struct SnapshotError {
    pub line: usize,
    pub reason: String,
}

pub fn write_snapshot(net: &InteractionNetwork) -> String {
    let mut out = String::new();
    let givens: Vec<String> = net.givens.iter().map(Formula::render).collect();
    let rules: Vec<&str> = net.catalog.iter().map(|r| r.name()).collect();
    writeln!(out, "{SNAPSHOT_HEADER}").unwrap();
    writeln!(out, "problem\t{}", net.problem_id).unwrap();
    writeln!(out, "givens\t{}", givens.join(&KEY_SEPARATOR.to_string())).unwrap();
    writeln!(out, "conclusion\t{}", net.conclusion).unwrap();
    writeln!(out, "rules\t{}", rules.join(",")).unwrap();
    for s in net.states().values() {
        let value = net.value(&s.key).map_or("-".to_string(), |v| v.to_string());
        writeln!(
            out,
            "state\t{}\t{}\t{}\t{}\t{}\t{}",
            s.key, s.goal as u8, s.visits, s.correct, s.errors, value
        )
        .unwrap();
    }
    for t in net.transitions() {
        let rule = t.rule.map_or("-", |r| r.name());
        let delta = match &t.delta {
            Delta::Added(f) => format!("+{f}"),
            Delta::Removed(f) => format!("-{f}"),
        };
        writeln!(out, "transition\t{}\t{}\t{}\t{}\t{}", t.src, t.dst, rule, delta, t.freq).unwrap();
    }
    out
}

pub fn read_snapshot(text: &str) -> Result<InteractionNetwork, SnapshotError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, reason: String| SnapshotError { line, reason };
    match lines.next() {
        Some((_, SNAPSHOT_HEADER)) => {}
        Some((n, other)) => return Err(err(n, format!("expected {SNAPSHOT_HEADER:?}, found {other:?}"))),
        None => return Err(err(0, "empty snapshot".into())),
    }
    let mut problem = None;
    let mut givens = None;
    let mut conclusion = None;
    let mut rules = None;
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut values = BTreeMap::new();
    let mut last = 1;
    for (n, line) in lines {
        last = n;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let formula = |s: &str| parse(s).map_err(|e| err(n, format!("{s:?}: {e}")));
        let key = |s: &str| StateKey::parse(s).map_err(|e| err(n, format!("{s:?}: {e}")));
        let number = |s: &str| s.parse::<u64>().map_err(|e| err(n, format!("{s:?}: {e}")));
        let arity = |want: usize| {
            if fields.len() == want {
                Ok(())
            } else {
                Err(err(n, format!("{} record needs {} fields, found {}", fields[0], want, fields.len())))
            }
        };
        match fields[0] {
            "problem" => {
                arity(2)?;
                problem = Some(fields[1].to_string());
            }
            "givens" => {
                arity(2)?;
                givens = Some(
                    fields[1]
                        .split(KEY_SEPARATOR)
                        .map(formula)
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            "conclusion" => {
                arity(2)?;
                conclusion = Some(formula(fields[1])?);
            }
            "rules" => {
                arity(2)?;
                rules = Some(
                    fields[1]
                        .split(',')
                        .map(|r| r.parse::<RuleId>().map_err(|e| err(n, e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            "state" => {
                arity(7)?;
                let k = key(fields[1])?;
                let goal = match fields[2] {
                    "0" => false,
                    "1" => true,
                    g => return Err(err(n, format!("goal flag {g:?}"))),
                };
                if fields[6] != "-" {
                    let v: f64 = fields[6].parse().map_err(|e| err(n, format!("value: {e}")))?;
                    values.insert(k.clone(), v);
                }
                states.push(StateInfo {
                    key: k,
                    goal,
                    visits: number(fields[3])?,
                    correct: number(fields[4])?,
                    errors: number(fields[5])?,
                });
            }
            "transition" => {
                arity(6)?;
                let rule = match fields[3] {
                    "-" => None,
                    r => Some(r.parse::<RuleId>().map_err(|e| err(n, e.to_string()))?),
                };
                let delta = match fields[4].split_at_checked(1) {
                    Some(("+", f)) => Delta::Added(formula(f)?),
                    Some(("-", f)) => Delta::Removed(formula(f)?),
                    _ => return Err(err(n, format!("statement change {:?}", fields[4]))),
                };
                transitions.push(Transition {
                    src: key(fields[1])?,
                    dst: key(fields[2])?,
                    rule,
                    delta,
                    freq: number(fields[5])?,
                });
            }
            other => return Err(err(n, format!("unknown record {other:?}"))),
        }
    }
    let missing = |what: &str| err(last, format!("missing {what} record"));
    let mut net = InteractionNetwork::from_parts(
        problem.ok_or_else(|| missing("problem"))?,
        givens.ok_or_else(|| missing("givens"))?,
        conclusion.ok_or_else(|| missing("conclusion"))?,
        rules.ok_or_else(|| missing("rules"))?,
        states,
        transitions,
    )
    .map_err(|reason| err(last, reason))?;
    net.set_values(values);
    Ok(net)
}
