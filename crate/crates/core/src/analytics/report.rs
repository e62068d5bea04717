use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::session::Phase;

use super::metrics::SessionMetrics;
use super::stats::{correlate, median_split, percentiles, Correlation, Group, ScoreWeights, StatsError};

pub const PHASE_FIELDS: [&str; 4] = ["total_time", "total_steps", "accuracy", "total_requests"];

pub const HINT_FIELDS: [&str; 8] = [
    "total_added",
    "justification_rate",
    "adoption_rate",
    "steps_until_justified",
    "total_unused",
    "pct_unused_of_total",
    "pct_attempted_of_unused",
    "steps_before",
];

/// Cohort score of each student from percentiles of their metrics in `phase`.
pub fn phase_scores(metrics: &[SessionMetrics], phase: Phase, weights: &ScoreWeights) -> Result<Vec<(String, f64)>, StatsError> {
    let pick = |f: fn(&super::PhaseMetrics) -> f64| -> Vec<f64> { metrics.iter().map(|m| f(&m.phase(phase))).collect() };
    let time = percentiles(&pick(|p| p.total_time));
    let steps = percentiles(&pick(|p| p.total_steps as f64));
    let acc = percentiles(&pick(|p| p.accuracy));
    metrics
        .iter()
        .enumerate()
        .map(|(i, m)| Ok((m.student.clone(), weights.score(time[i], steps[i], acc[i])?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentRow {
    pub metrics: SessionMetrics,
    pub score: f64,
    pub group: Option<Group>,
}

/// Pretest scores and High/Low groups for a cohort; groups are left empty
/// for a cohort of one.
pub fn cohort_rows(metrics: Vec<SessionMetrics>) -> Result<Vec<StudentRow>, StatsError> {
    let scores = phase_scores(&metrics, Phase::Pretest, &ScoreWeights::default())?;
    let groups = if scores.len() >= 2 { median_split(&scores)? } else { BTreeMap::new() };
    Ok(metrics
        .into_iter()
        .zip(scores)
        .map(|(m, (student, score))| StudentRow {
            group: groups.get(&student).copied(),
            metrics: m,
            score,
        })
        .collect())
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["student", "condition", "group", "score"].map(String::from).to_vec();
    for phase in Phase::ALL {
        h.extend(PHASE_FIELDS.iter().map(|f| format!("{}_{f}", phase.name())));
    }
    h.extend(HINT_FIELDS.iter().map(|f| f.to_string()));
    h
}

/// Floats always carry a decimal point, so `1.0` is never written as `1`.
fn float(v: f64) -> String {
    format!("{v:?}")
}

fn row(r: &StudentRow) -> Vec<String> {
    let m = &r.metrics;
    let mut out = vec![
        m.student.clone(),
        m.condition.map(|c| c.code().to_string()).unwrap_or_default(),
        r.group.map(|g| g.to_string()).unwrap_or_default(),
        float(r.score),
    ];
    for phase in Phase::ALL {
        let p = m.phase(phase);
        out.extend([
            float(p.total_time),
            p.total_steps.to_string(),
            float(p.accuracy),
            p.total_requests.to_string(),
        ]);
    }
    let h = &m.hints;
    out.extend([
        h.total_added.to_string(),
        float(h.justification_rate),
        float(h.adoption_rate),
        float(h.steps_until_justified),
        h.total_unused.to_string(),
        float(h.pct_unused_of_total),
        float(h.pct_attempted_of_unused),
        float(h.steps_before),
    ]);
    out
}

pub fn write_csv<W: Write>(rows: &[StudentRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for r in rows {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv(rows: &[StudentRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub hint_metric: &'static str,
    pub outcome: String,
    pub result: Option<Correlation>,
}

/// Pearson correlations of the justification and adoption rates with each
/// posttest metric, over students who saw at least one hint. Degenerate
/// pairs are reported without a result.
pub fn hint_correlations(metrics: &[SessionMetrics]) -> Vec<CorrelationRow> {
    let with_hints: Vec<&SessionMetrics> = metrics.iter().filter(|m| m.hints.total_added > 0).collect();
    let rates: [(&'static str, fn(&SessionMetrics) -> f64); 2] = [
        ("justification_rate", |m| m.hints.justification_rate),
        ("adoption_rate", |m| m.hints.adoption_rate),
    ];
    let outcomes: [(&str, fn(&SessionMetrics) -> f64); 3] = [
        ("total_time", |m| m.phase(Phase::Posttest).total_time),
        ("total_steps", |m| m.phase(Phase::Posttest).total_steps as f64),
        ("accuracy", |m| m.phase(Phase::Posttest).accuracy),
    ];
    let mut out = Vec::new();
    for (name, rate) in rates {
        let xs: Vec<f64> = with_hints.iter().map(|m| rate(m)).collect();
        for (oname, outcome) in outcomes {
            let ys: Vec<f64> = with_hints.iter().map(|m| outcome(m)).collect();
            out.push(CorrelationRow {
                hint_metric: name,
                outcome: format!("posttest_{oname}"),
                result: correlate(&xs, &ys).ok(),
            });
        }
    }
    out
}
