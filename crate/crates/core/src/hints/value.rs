use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::proof::StateKey;

use super::network::InteractionNetwork;
use super::HintError;

/// Rewards and stopping rule for value iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub goal_reward: f64,
    pub step_cost: f64,
    /// Scaled by the fraction of visits to a state that produced an error.
    pub error_penalty: f64,
    pub discount: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Value of non-goal states with no way forward. Defaults to
    /// `step_cost / (1 - discount)`, or `-goal_reward` when `discount` is 1.
    pub dead_end_value: Option<f64>,
}

impl Default for RewardConfig {
    fn default() -> RewardConfig {
        RewardConfig {
            goal_reward: 100.0,
            step_cost: -1.0,
            error_penalty: -10.0,
            discount: 0.9,
            tolerance: 1e-6,
            max_iterations: 10_000,
            dead_end_value: None,
        }
    }
}

impl RewardConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.tolerance > 0.0) {
            return Err("tolerance must be positive".into());
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err("discount must lie in (0, 1]".into());
        }
        if self.step_cost > 0.0 || self.error_penalty > 0.0 {
            return Err("step_cost and error_penalty must not be positive".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<RewardConfig, String> {
        let cfg: RewardConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn dead_end(&self) -> f64 {
        self.dead_end_value.unwrap_or(if self.discount < 1.0 {
            self.step_cost / (1.0 - self.discount)
        } else {
            -self.goal_reward
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueReport {
    pub values: BTreeMap<StateKey, f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Largest change of each sweep.
    pub deltas: Vec<f64>,
}

/// Synchronous value iteration over add-transitions. Goal states are pinned
/// at the goal reward and dead ends at the dead-end value.
pub fn value_iterate(net: &InteractionNetwork, cfg: &RewardConfig) -> Result<ValueReport, HintError> {
    let keys: Vec<&StateKey> = net.states().keys().collect();
    let index: BTreeMap<&StateKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let info: Vec<_> = net.states().values().collect();
    let succ: Vec<Vec<usize>> = keys
        .iter()
        .map(|k| {
            let mut out: Vec<usize> = net.adds_from(k).map(|t| index[&t.dst]).collect();
            out.dedup();
            out
        })
        .collect();
    let dead_end = cfg.dead_end();
    let base: Vec<f64> = info
        .iter()
        .map(|s| cfg.step_cost + cfg.error_penalty * s.err_frac())
        .collect();
    let mut v: Vec<f64> = info
        .iter()
        .zip(&succ)
        .map(|(s, out)| {
            if s.goal {
                cfg.goal_reward
            } else if out.is_empty() {
                dead_end
            } else {
                0.0
            }
        })
        .collect();
    let mut next = v.clone();
    let mut deltas = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let mut residual: f64 = 0.0;
        for i in 0..v.len() {
            if info[i].goal || succ[i].is_empty() {
                continue;
            }
            let best = succ[i].iter().map(|&j| v[j]).fold(f64::NEG_INFINITY, f64::max);
            next[i] = base[i] + cfg.discount * best;
            residual = residual.max((next[i] - v[i]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        deltas.push(residual);
        if residual < cfg.tolerance {
            return Ok(ValueReport {
                values: keys.into_iter().cloned().zip(v).collect(),
                iterations: iteration,
                residual,
                deltas,
            });
        }
    }
    Err(HintError::NoConvergence {
        iterations: cfg.max_iterations,
        residual: deltas.last().copied().unwrap_or(f64::INFINITY),
    })
}
