//! Model-based value estimation for reinforcement learning.
//!
//! Agents learn a deterministic environment model online, roll it forward a
//! few steps from replayed states, and fit their value functions to the
//! resulting multi-step targets. Model-free baselines (Q-learning, n-step
//! TD, Dyna-Q, DQN, DDPG) share the same machinery so that comparisons are
//! like for like.

pub mod analysis;
pub mod approx;
pub mod agents;
pub mod envmodel;
pub mod envs;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;
pub mod tabular;

pub use error::{Error, Result};
pub use mdp::{discounted_return, Discount, ReplayBuffer, Transition};
