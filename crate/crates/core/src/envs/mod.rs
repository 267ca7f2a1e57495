//! Deterministic, seedable simulation environments.

mod cartpole;
mod chain;
mod cliff;
mod pendulum;
mod uav;

pub use cartpole::{cartpole_step, CartPole, CartPoleParams, CartPoleState, Push};
pub use chain::Chain;
pub use cliff::{cliff_step, CliffWalking, GridState, Move, CLIFF_COLS, CLIFF_ROWS};
pub use pendulum::{pendulum_step, Pendulum, PendulumParams, PendulumState};
pub use uav::{uav_observe, uav_reward, uav_step, uav_threat, Uav, UavAction, UavParams, UavWorld};

use crate::error::Result;
use crate::mdp::{Shape, Shaped};

/// An action for a vector-observation environment.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl Shaped for Action {
    fn shape(&self) -> Shape {
        match self {
            Action::Discrete(_) => Shape::Index,
            Action::Continuous(v) => Shape::Vector(v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpace {
    Discrete(usize),
    /// Symmetric box `[-bound_i, bound_i]` per component.
    Box { bounds: Vec<f64> },
}

impl ActionSpace {
    /// Width of the action encoding fed to networks: one-hot size for
    /// discrete spaces, component count for boxes.
    pub fn encoded_dim(&self) -> usize {
        match self {
            ActionSpace::Discrete(n) => *n,
            ActionSpace::Box { bounds } => bounds.len(),
        }
    }

    /// Network encoding: one-hot, or components divided by their bounds.
    pub fn encode(&self, action: &Action, out: &mut Vec<f64>) {
        match (self, action) {
            (ActionSpace::Discrete(n), Action::Discrete(i)) => {
                out.extend((0..*n).map(|j| if j == *i { 1.0 } else { 0.0 }))
            }
            (ActionSpace::Box { bounds }, Action::Continuous(a)) => {
                out.extend(a.iter().zip(bounds).map(|(x, b)| x / b))
            }
            _ => panic!("action {action:?} does not belong to {self:?}"),
        }
    }

    pub fn clip(&self, action: Action) -> Action {
        match (self, action) {
            (ActionSpace::Box { bounds }, Action::Continuous(a)) => Action::Continuous(
                a.iter().zip(bounds).map(|(x, b)| x.clamp(-b, *b)).collect(),
            ),
            (_, a) => a,
        }
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// True termination; bootstrapping stops here.
    pub terminal: bool,
    /// Step cap reached without termination.
    pub truncated: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// A vector-observation environment driven by an internal seeded source.
pub trait Environment: Send {
    fn name(&self) -> &'static str;
    fn observation_dim(&self) -> usize;
    fn action_space(&self) -> ActionSpace;
    /// Per-dimension scale that maps observations to roughly unit magnitude.
    fn observation_scale(&self) -> Vec<f64>;
    /// Typical magnitude of a single-step reward.
    fn reward_scale(&self) -> f64;
    fn reset(&mut self) -> Vec<f64>;
    fn step(&mut self, action: &Action) -> Result<Step>;
    /// Whether an observation is a termination state, used to cut predicted
    /// branches. Environments without state-defined termination return false.
    fn is_terminal(&self, _observation: &[f64]) -> bool {
        false
    }
}

/// Finite-state environment for tabular agents.
pub trait TabularEnv {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn reset(&mut self) -> usize;
    /// Returns `(next_state, reward, terminal)`.
    fn step(&mut self, action: usize) -> (usize, f64, bool);
}
