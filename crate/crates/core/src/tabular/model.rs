use super::{q_update, QTable, TabularTransition};
use crate::mdp::Discount;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEntry {
    pub next_state: usize,
    pub reward: f64,
    pub done: bool,
}

/// Exact deterministic model `(s, a) -> (s', r, done)` learned from visits.
#[derive(Debug, Clone)]
pub struct TabularModel {
    num_actions: usize,
    table: Vec<Option<ModelEntry>>,
    visited: Vec<(usize, usize)>,
}

impl TabularModel {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            table: vec![None; num_states * num_actions],
            visited: Vec::new(),
        }
    }

    pub fn update(&mut self, t: &TabularTransition) {
        let slot = &mut self.table[t.state * self.num_actions + t.action];
        if slot.is_none() {
            self.visited.push((t.state, t.action));
        }
        *slot = Some(ModelEntry {
            next_state: t.next_state,
            reward: t.reward,
            done: t.done,
        });
    }

    pub fn lookup(&self, s: usize, a: usize) -> Option<ModelEntry> {
        self.table[s * self.num_actions + a]
    }

    /// Visited pairs in first-visit order.
    pub fn visited(&self) -> &[(usize, usize)] {
        &self.visited
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedStep {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub done: bool,
}

/// Predicted branch of at most `horizon` steps from `(s0, a0)`. Later actions
/// are greedy in `q`. Stops at the first unvisited pair or predicted terminal.
pub fn tabular_rollout(
    m: &TabularModel,
    q: &QTable,
    s0: usize,
    a0: usize,
    horizon: usize,
) -> Vec<PredictedStep> {
    let mut branch = Vec::with_capacity(horizon);
    let (mut s, mut a) = (s0, a0);
    while branch.len() < horizon {
        let Some(e) = m.lookup(s, a) else { break };
        branch.push(PredictedStep {
            state: s,
            action: a,
            reward: e.reward,
            next_state: e.next_state,
            done: e.done,
        });
        if e.done {
            break;
        }
        s = e.next_state;
        a = q.greedy(s);
    }
    branch
}

/// Records `t` in the model, then applies the one-step update to every
/// step of the predicted branch from `(t.state, t.action)`, tip first, so
/// value learned at the end of the branch reaches its root in one call.
pub fn dyna_mpc_train_step(
    q: &mut QTable,
    m: &mut TabularModel,
    t: &TabularTransition,
    horizon: usize,
    d: Discount,
) {
    m.update(t);
    let branch = tabular_rollout(m, q, t.state, t.action, horizon);
    if branch.is_empty() {
        q_update(q, t, d);
        return;
    }
    let gamma = d.gamma();
    for n in (0..branch.len()).rev() {
        let step = branch[n];
        let target = if step.done {
            step.reward
        } else if let Some(next) = branch.get(n + 1) {
            step.reward + gamma * q.get(next.state, next.action)
        } else {
            step.reward + gamma * q.max_value(step.next_state)
        };
        q.nudge(step.state, step.action, target);
    }
}
