//! Tabular value learning: Q-learning, n-step TD on real trajectories,
//! Dyna-Q planning and Dyna-MPC multi-step value updates over an exact
//! table model.

mod agent;
mod model;

pub use agent::{greedy_return, TabularAgent, TabularAlgorithm, TabularEpisode};
pub use model::{
    dyna_mpc_train_step, tabular_rollout, ModelEntry, PredictedStep, TabularModel,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{Discount, Transition};

pub type TabularTransition = Transition<usize, usize>;

/// Dense action-value table; unvisited entries read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        if num_actions == 0 || num_states == 0 {
            return Err(Error::Config("Q-table needs at least one state and action".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("learning rate {alpha} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("exploration rate {epsilon} outside [0, 1]")));
        }
        Ok(Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
            alpha,
            epsilon,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.num_actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, s: usize) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, v) in row.iter().enumerate().skip(1) {
            if *v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Moves `Q(s, a)` a step of size `alpha` toward `target`.
    pub fn nudge(&mut self, s: usize, a: usize, target: f64) {
        let q = self.get(s, a);
        self.set(s, a, q + self.alpha * (target - q));
    }
}

pub fn epsilon_greedy<R: Rng + ?Sized>(q: &QTable, s: usize, rng: &mut R) -> usize {
    if q.epsilon > 0.0 && rng.random::<f64>() < q.epsilon {
        rng.random_range(0..q.num_actions)
    } else {
        q.greedy(s)
    }
}

/// One-step target `r + gamma max_a' Q(s', a')`, without bootstrap on `done`.
pub fn one_step_target(q: &QTable, t: &TabularTransition, d: Discount) -> f64 {
    if t.done {
        t.reward
    } else {
        t.reward + d.gamma() * q.max_value(t.next_state)
    }
}

pub fn q_update(q: &mut QTable, t: &TabularTransition, d: Discount) {
    let target = one_step_target(q, t, d);
    q.nudge(t.state, t.action, target);
}

/// `sum_{i<n} gamma^i r_i + gamma^n max_a Q(s_n, a)` over `n` consecutive real
/// transitions. A terminal transition inside the segment ends the sum there.
pub fn ntd_target(segment: &[TabularTransition], n: usize, q: &QTable, d: Discount) -> Result<f64> {
    let gamma = d.gamma();
    let mut total = 0.0;
    let mut weight = 1.0;
    for t in segment.iter().take(n) {
        total += weight * t.reward;
        weight *= gamma;
        if t.done {
            return Ok(total);
        }
    }
    if segment.len() < n {
        return Err(Error::IncompleteSegment {
            expected: n,
            got: segment.len(),
        });
    }
    Ok(total + weight * q.max_value(segment[n - 1].next_state))
}
