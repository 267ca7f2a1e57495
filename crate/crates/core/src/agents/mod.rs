//! Deep value-based and actor-critic agents.
//!
//! DQN and DDPG learn from a replay buffer with soft-updated target
//! networks. Their model-based variants also fit an [`EnvModel`] on every
//! batch; while the model's smoothed loss stays under the availability
//! threshold, critic targets come from N-step branches predicted by the
//! model instead of single real transitions.
//!
//! [`EnvModel`]: crate::envmodel::EnvModel

mod deep;
mod networks;
mod policy;
mod targets;

pub use deep::{
    evaluate, AgentConfig, BranchRows, DeepAgent, DeepKind, EpisodeRecord, Evaluation, GreedyPolicy, ModelKind,
    StepReport, UpdateReport,
};
pub use networks::{argmax, normalized_states, Actor, Critic, CriticRow};
pub use policy::{PolicyCheckpoint, PolicyKind};
pub use targets::{mpc_critic_loss, mpc_q_targets, td_target};
