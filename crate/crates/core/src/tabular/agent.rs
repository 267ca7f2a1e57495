use std::collections::VecDeque;

use rand::Rng;

use super::{
    dyna_mpc_train_step, epsilon_greedy, ntd_target, q_update, QTable, TabularModel,
    TabularTransition,
};
use crate::envs::TabularEnv;
use crate::error::Result;
use crate::mdp::{Discount, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabularAlgorithm {
    QLearning,
    /// n-step TD targets from consecutive real transitions.
    NStepTd { n: usize },
    /// One-step updates plus `planning_steps` replays of random model entries.
    DynaQ { planning_steps: usize },
    /// Multi-step value updates along greedy branches of the table model.
    DynaMpc { horizon: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabularEpisode {
    pub total_reward: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct TabularAgent {
    pub q: QTable,
    pub model: TabularModel,
    algorithm: TabularAlgorithm,
    discount: Discount,
}

impl TabularAgent {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        algorithm: TabularAlgorithm,
        alpha: f64,
        epsilon: f64,
        discount: Discount,
    ) -> Result<Self> {
        Ok(Self {
            q: QTable::new(num_states, num_actions, alpha, epsilon)?,
            model: TabularModel::new(num_states, num_actions),
            algorithm,
            discount,
        })
    }

    pub fn algorithm(&self) -> TabularAlgorithm {
        self.algorithm
    }

    /// One exploratory training episode, capped at `step_cap` steps.
    pub fn run_episode<E, R>(&mut self, env: &mut E, rng: &mut R, step_cap: usize) -> TabularEpisode
    where
        E: TabularEnv + ?Sized,
        R: Rng + ?Sized,
    {
        let d = self.discount;
        let mut window: VecDeque<TabularTransition> = VecDeque::new();
        let mut s = env.reset();
        let mut total = 0.0;
        let mut steps = 0;
        while steps < step_cap {
            let a = epsilon_greedy(&self.q, s, rng);
            let (ns, r, done) = env.step(a);
            steps += 1;
            total += r;
            let t = Transition {
                state: s,
                action: a,
                reward: r,
                next_state: ns,
                done,
            };
            match self.algorithm {
                TabularAlgorithm::QLearning => q_update(&mut self.q, &t, d),
                TabularAlgorithm::NStepTd { n } => {
                    window.push_back(t);
                    if window.len() == n {
                        self.apply_ntd(&mut window, n);
                    }
                    if done {
                        while !window.is_empty() {
                            self.apply_ntd(&mut window, n);
                        }
                    }
                }
                TabularAlgorithm::DynaQ { planning_steps } => {
                    q_update(&mut self.q, &t, d);
                    self.model.update(&t);
                    for _ in 0..planning_steps {
                        let visited = self.model.visited();
                        let (ps, pa) = visited[rng.random_range(0..visited.len())];
                        let e = self.model.lookup(ps, pa).expect("visited pairs have entries");
                        let replay = Transition {
                            state: ps,
                            action: pa,
                            reward: e.reward,
                            next_state: e.next_state,
                            done: e.done,
                        };
                        q_update(&mut self.q, &replay, d);
                    }
                }
                TabularAlgorithm::DynaMpc { horizon } => {
                    dyna_mpc_train_step(&mut self.q, &mut self.model, &t, horizon, d)
                }
            }
            if done {
                break;
            }
            s = ns;
        }
        TabularEpisode {
            total_reward: total,
            steps,
        }
    }

    fn apply_ntd(&mut self, window: &mut VecDeque<TabularTransition>, n: usize) {
        let segment: Vec<_> = window.iter().cloned().collect();
        if let Ok(target) = ntd_target(&segment, n, &self.q, self.discount) {
            self.q.nudge(segment[0].state, segment[0].action, target);
        }
        window.pop_front();
    }
}

/// Undiscounted return of the greedy policy, capped at `step_cap` steps.
pub fn greedy_return<E: TabularEnv + ?Sized>(env: &mut E, q: &QTable, step_cap: usize) -> f64 {
    let mut s = env.reset();
    let mut total = 0.0;
    for _ in 0..step_cap {
        let (ns, r, done) = env.step(q.greedy(s));
        total += r;
        if done {
            break;
        }
        s = ns;
    }
    total
}
