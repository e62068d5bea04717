use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("OutOfRange: {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("TooFewStudents: need at least {needed}, got {got}")]
    TooFewStudents { needed: usize, got: usize },
    #[error("DegenerateInput: {0}")]
    DegenerateInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub w_time: f64,
    pub w_steps: f64,
    pub w_acc: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_time: 0.5,
            w_steps: 0.3,
            w_acc: 0.2,
        }
    }
}

impl ScoreWeights {
    pub fn score(&self, time_pct: f64, steps_pct: f64, acc_pct: f64) -> Result<f64, StatsError> {
        for (name, value) in [("time_pct", time_pct), ("steps_pct", steps_pct), ("acc_pct", acc_pct)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(StatsError::OutOfRange { name, value });
            }
        }
        Ok(self.w_time * (1.0 - time_pct) + self.w_steps * (1.0 - steps_pct) + self.w_acc * acc_pct)
    }
}

/// Combined score from cohort percentiles: less time and fewer steps are
/// better, higher accuracy is better.
pub fn score(time_pct: f64, steps_pct: f64, acc_pct: f64) -> Result<f64, StatsError> {
    ScoreWeights::default().score(time_pct, steps_pct, acc_pct)
}

/// Empirical percentile of each value: its 1-based rank over `n`, tied
/// values sharing their mean rank.
pub fn percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mean_rank / n as f64;
        }
        i = j + 1;
    }
    out
}

/// Stratified random assignment: students sorted by score are cut into
/// strata of one student per condition and shuffled within each stratum. A
/// short final stratum receives a random subset of the conditions.
pub fn assign_conditions<C: Clone>(
    scores: &[(String, f64)],
    conditions: &[C],
    seed: u64,
) -> Result<BTreeMap<String, C>, StatsError> {
    if conditions.is_empty() {
        return Err(StatsError::DegenerateInput("no conditions".into()));
    }
    let needed = conditions.len().max(2);
    if scores.len() < needed {
        return Err(StatsError::TooFewStudents {
            needed,
            got: scores.len(),
        });
    }
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for stratum in sorted.chunks(conditions.len()) {
        let mut slots: Vec<usize> = (0..conditions.len()).collect();
        slots.shuffle(&mut rng);
        for (student, slot) in stratum.iter().zip(slots) {
            out.insert(student.0.clone(), conditions[slot].clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    High,
    Low,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Group::High => "High",
            Group::Low => "Low",
        })
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// High above the median, Low at or below it.
pub fn median_split(scores: &[(String, f64)]) -> Result<BTreeMap<String, Group>, StatsError> {
    if scores.len() < 2 {
        return Err(StatsError::TooFewStudents {
            needed: 2,
            got: scores.len(),
        });
    }
    let values: Vec<f64> = scores.iter().map(|s| s.1).collect();
    let m = median(&values).expect("non-empty");
    Ok(scores
        .iter()
        .map(|(s, v)| (s.clone(), if *v > m { Group::High } else { Group::Low }))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson correlation with a two-sided p-value from the t statistic on
/// n - 2 degrees of freedom.
pub fn correlate(xs: &[f64], ys: &[f64]) -> Result<Correlation, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::DegenerateInput(format!(
            "lengths differ: {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::DegenerateInput(format!("need at least 3 pairs, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("constant input".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| StatsError::DegenerateInput(e.to_string()))?;
        (2.0 * dist.cdf(-t.abs())).min(1.0)
    };
    Ok(Correlation { r, p, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_anchors() {
        assert_eq!(score(0.0, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(score(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert!((score(0.5, 0.5, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(score(1.2, 0.0, 0.0), Err(StatsError::OutOfRange { .. })));
    }

    #[test]
    fn percentile_ties_share_mean_rank() {
        assert_eq!(percentiles(&[3.0, 1.0, 3.0, 2.0]), vec![0.875, 0.25, 0.875, 0.5]);
    }

    #[test]
    fn split_examples() {
        let s = |v: &[f64]| v.iter().enumerate().map(|(i, x)| (format!("s{i}"), *x)).collect::<Vec<_>>();
        let g = median_split(&s(&[0.2, 0.4, 0.6, 0.8])).unwrap();
        assert_eq!(g["s0"], Group::Low);
        assert_eq!(g["s1"], Group::Low);
        assert_eq!(g["s2"], Group::High);
        assert_eq!(g["s3"], Group::High);
        assert!(median_split(&s(&[0.5; 5])).unwrap().values().all(|g| *g == Group::Low));
        assert!(median_split(&s(&[0.5])).is_err());
    }

    #[test]
    fn correlation_examples() {
        let c = correlate(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((c.r - 0.6).abs() < 1e-12);
        assert_eq!(correlate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap().r, 1.0);
        assert_eq!(correlate(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap().r, -1.0);
        assert!(correlate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
