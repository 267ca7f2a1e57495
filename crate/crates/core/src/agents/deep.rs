//! Replay-based deep agents: DQN and DDPG, optionally with model-branched
//! multi-step targets.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::networks::{Actor, Critic, CriticRow};
use super::targets::{mpc_q_targets, td_target};
use crate::approx::Matrix;
use crate::envmodel::{model_rollout, EnvModel, ModelCodec, ModelGate, ModelLosses, ModelOptim, RolloutStart, VecTransition};
use crate::envs::{Action, ActionSpace, Environment};
use crate::error::{Error, Result};
use crate::mdp::{ReplayBuffer, Transition};
use crate::rng::{streams, substream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    None,
    Separate,
    Combined,
}

/// Which states along a model branch receive critic rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchRows {
    /// Every predicted step, weighted by `gamma^n`.
    All,
    /// Only the real sampled state, with its N-step model target.
    #[default]
    Start,
}

/// Hyperparameters shared by every agent family. Fields that do not apply
/// to a family are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    /// Prediction horizon N.
    pub horizon: usize,
    pub gamma: f64,
    /// Exploration rate for discrete actions.
    pub epsilon: Option<f64>,
    /// Gaussian exploration noise for continuous actions, as a fraction of
    /// each action bound.
    pub noise: Option<f64>,
    pub batch_size: usize,
    /// Critic (or Q-table) learning rate.
    pub lr_critic: f64,
    pub lr_actor: Option<f64>,
    /// Learning rates of the dynamics, reward and combined model networks.
    pub lr_model: Option<f64>,
    pub buffer_size: Option<usize>,
    pub model: ModelKind,
    pub epsilon_m: f64,
    pub gate_smoothing: f64,
    /// Soft target update factor.
    pub zeta: f64,
    pub hidden: Vec<usize>,
    pub model_hidden: Vec<usize>,
    /// Reward-loss weight of combined models.
    pub lambda: f64,
    /// Models predict state changes rather than next states.
    pub residual_model: bool,
    /// Dyna-Q planning updates per real step.
    pub planning_steps: Option<usize>,
    #[serde(default)]
    pub branch_rows: BranchRows,
    pub episodes: usize,
    pub steps_per_episode: usize,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if let Some(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return bad("epsilon must lie in [0, 1]");
            }
        }
        if let Some(n) = self.noise {
            if !(n >= 0.0) {
                return bad("noise must be non-negative");
            }
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return bad("zeta must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.gate_smoothing) {
            return bad("gate smoothing must lie in [0, 1]");
        }
        if self.episodes == 0 || self.steps_per_episode == 0 {
            return bad("episodes and steps per episode must be positive");
        }
        Ok(())
    }
}

/// Which value learner drives a deep agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeepKind {
    Dqn,
    Ddpg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub loss_q: f64,
    pub loss_actor: Option<f64>,
    pub model: Option<ModelLosses>,
    pub gate_open: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub transition: VecTransition,
    /// Present when the buffer held at least one batch.
    pub update: Option<UpdateReport>,
    /// `(return, steps)` of the episode this step ended.
    pub episode_end: Option<(f64, usize)>,
}

/// Per-episode summary of training.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeRecord {
    pub total_reward: f64,
    pub steps: usize,
    /// Mean critic loss over updates in the episode.
    pub loss_q: Option<f64>,
    pub loss_model_state: Option<f64>,
    pub loss_model_reward: Option<f64>,
    pub gate_open_fraction: Option<f64>,
    /// Return of the greedy policy after the episode, where it is cheap to
    /// compute (tabular agents).
    pub greedy_return: Option<f64>,
}

/// A greedy (noise-free) decision rule.
pub trait GreedyPolicy {
    fn greedy_action(&self, observation: &[f64]) -> Result<Action>;
}

pub struct DeepAgent {
    pub config: AgentConfig,
    pub kind: DeepKind,
    pub critic: Critic,
    pub actor: Option<Actor>,
    pub model: Option<(EnvModel, ModelOptim)>,
    pub gate: ModelGate,
    pub buffer: ReplayBuffer<Vec<f64>, Action>,
    /// Critic rewards are `r / value_scale`.
    pub value_scale: f64,
    space: ActionSpace,
    rng: SimRng,
    observation: Option<Vec<f64>>,
    episode_return: f64,
    episode_steps: usize,
}

impl DeepAgent {
    /// Builds an agent for `env`. Networks and exploration draw from
    /// sub-streams of `seed`; the model uses its own stream so that adding
    /// one does not perturb the rest of the run.
    pub fn new(kind: DeepKind, config: AgentConfig, env: &dyn Environment, seed: u64) -> Result<Self> {
        config.validate()?;
        let space = env.action_space();
        let scale = env.observation_scale();
        let mut init = substream(seed, streams::INIT);
        let critic = Critic::new(scale.clone(), space.clone(), &config.hidden, config.lr_critic, config.zeta, &mut init)?;
        let actor = match (kind, &space) {
            (DeepKind::Dqn, ActionSpace::Discrete(_)) => None,
            (DeepKind::Ddpg, ActionSpace::Box { bounds }) => Some(Actor::new(
                scale.clone(),
                bounds.clone(),
                &config.hidden,
                config
                    .lr_actor
                    .ok_or_else(|| Error::Config("actor learning rate is required".into()))?,
                config.zeta,
                &mut init,
            )?),
            _ => {
                return Err(Error::Config(format!(
                    "{kind:?} cannot drive the action space of {}",
                    env.name()
                )))
            }
        };
        let model = match config.model {
            ModelKind::None => None,
            kind => {
                let mut rng = substream(seed, streams::MODEL_INIT);
                let codec = ModelCodec {
                    state_scale: scale.clone(),
                    reward_scale: env.reward_scale(),
                    action_space: space.clone(),
                    residual: config.residual_model,
                };
                let m = if kind == ModelKind::Separate {
                    EnvModel::separate(codec, &config.model_hidden, &mut rng)?
                } else {
                    EnvModel::combined(codec, &config.model_hidden, config.lambda, &mut rng)?
                };
                let lr = config
                    .lr_model
                    .ok_or_else(|| Error::Config("model learning rate is required".into()))?;
                let opt = m.optimizer(lr, lr, lr);
                Some((m, opt))
            }
        };
        let buffer = ReplayBuffer::new(
            config
                .buffer_size
                .ok_or_else(|| Error::Config("replay buffer size is required".into()))?,
        )?;
        Ok(Self {
            gate: ModelGate::new(config.epsilon_m, config.gate_smoothing),
            value_scale: env.reward_scale(),
            rng: substream(seed, streams::AGENT),
            config,
            kind,
            critic,
            actor,
            model,
            buffer,
            space,
            observation: None,
            episode_return: 0.0,
            episode_steps: 0,
        })
    }

    /// Exploratory or greedy action for `s`.
    pub fn act(&mut self, s: &[f64], explore: bool) -> Result<Action> {
        match &self.actor {
            None => {
                let eps = self.config.epsilon.unwrap_or(0.0);
                if explore && self.rng.random::<f64>() < eps {
                    let ActionSpace::Discrete(n) = self.space else { unreachable!() };
                    return Ok(Action::Discrete(self.rng.random_range(0..n)));
                }
                Ok(self.critic.greedy(&[s])?.remove(0))
            }
            Some(actor) => {
                let a = actor.actions(&actor.online, &[s])?.remove(0);
                let sigma = self.config.noise.unwrap_or(0.0);
                if !explore || sigma == 0.0 {
                    return Ok(a);
                }
                let Action::Continuous(mut v) = a else { unreachable!() };
                for (x, b) in v.iter_mut().zip(&actor.bounds) {
                    let n = Normal::new(0.0, sigma * b).map_err(|e| Error::Domain(e.to_string()))?;
                    *x += n.sample(&mut self.rng);
                }
                Ok(self.space.clip(Action::Continuous(v)))
            }
        }
    }

    /// One real environment step followed, once the buffer holds a batch, by
    /// one update of the model, critic, actor and targets.
    pub fn train_step(&mut self, env: &mut dyn Environment) -> Result<StepReport> {
        let s = match self.observation.take() {
            Some(s) => s,
            None => {
                self.episode_return = 0.0;
                self.episode_steps = 0;
                env.reset()
            }
        };
        let a = self.act(&s, true)?;
        let step = env.step(&a)?;
        let t = Transition::new(s, a, step.reward, step.observation.clone(), step.terminal)?;
        self.buffer.push(t.clone())?;
        self.episode_return += step.reward;
        self.episode_steps += 1;
        let update = if self.buffer.len() >= self.config.batch_size {
            Some(self.update(env)?)
        } else {
            None
        };
        let episode_end = if step.done() {
            Some((self.episode_return, self.episode_steps))
        } else {
            self.observation = Some(step.observation);
            None
        };
        Ok(StepReport {
            transition: t,
            update,
            episode_end,
        })
    }

    /// Trains until the current episode ends.
    pub fn run_episode(&mut self, env: &mut dyn Environment) -> Result<EpisodeRecord> {
        self.run_episode_with(env, &mut |_| {})
    }

    /// As [`run_episode`](Self::run_episode), passing every step report to `on_step`.
    pub fn run_episode_with(
        &mut self,
        env: &mut dyn Environment,
        on_step: &mut dyn FnMut(&StepReport),
    ) -> Result<EpisodeRecord> {
        let mut rec = EpisodeRecord::default();
        let (mut q, mut ms, mut mr) = (Vec::new(), Vec::new(), Vec::new());
        let mut gates = 0usize;
        loop {
            let r = self.train_step(env)?;
            on_step(&r);
            if let Some(u) = r.update {
                q.push(u.loss_q);
                if let Some(m) = u.model {
                    ms.push(m.state);
                    mr.push(m.reward);
                    gates += u.gate_open as usize;
                }
            }
            if let Some((total, steps)) = r.episode_end {
                rec.total_reward = total;
                rec.steps = steps;
                break;
            }
        }
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        rec.loss_q = mean(&q);
        rec.loss_model_state = mean(&ms);
        rec.loss_model_reward = mean(&mr);
        rec.gate_open_fraction = (!ms.is_empty()).then(|| gates as f64 / ms.len() as f64);
        Ok(rec)
    }

    /// Bootstrap values under the target networks at each state.
    fn target_values(&self, states: &[&[f64]]) -> Result<Vec<f64>> {
        match &self.actor {
            None => {
                let q = self.critic.action_values(self.critic.target.net(), states)?;
                Ok((0..q.rows())
                    .map(|i| q.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                    .collect())
            }
            Some(actor) => {
                let acts = actor.actions(actor.target.net(), states)?;
                let refs: Vec<&Action> = acts.iter().collect();
                self.critic.q_sa(self.critic.target.net(), states, &refs)
            }
        }
    }

    /// One-step rows from real transitions.
    pub fn td_rows(&self, batch: &[&VecTransition]) -> Result<Vec<CriticRow>> {
        let next: Vec<&[f64]> = batch.iter().map(|t| t.next_state.as_slice()).collect();
        let values = self.target_values(&next)?;
        Ok(batch
            .iter()
            .zip(values)
            .map(|(t, v)| CriticRow {
                state: t.state.clone(),
                action: t.action.clone(),
                target: td_target(t.reward / self.value_scale, t.done, self.config.gamma, v),
                weight: 1.0,
            })
            .collect())
    }

    /// Current (noise-free) policy applied to a batch of raw states.
    fn policy_batch(&self, states: &Matrix) -> Result<Vec<Action>> {
        let rows: Vec<&[f64]> = (0..states.rows()).map(|i| states.row(i)).collect();
        match &self.actor {
            None => self.critic.greedy(&rows),
            Some(actor) => {
                actor.actions(&actor.online, &rows)
            }
        }
    }

    /// Rows from N-step model branches, weighted by `gamma^n`. Samples whose
    /// branch is cut short without terminating fall back to one-step rows.
    pub fn branch_rows(&self, batch: &[&VecTransition], env: &dyn Environment) -> Result<Vec<CriticRow>> {
        let (model, _) = self
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("branch targets need a model".into()))?;
        let n = self.config.horizon;
        let gamma = self.config.gamma;
        let starts: Vec<RolloutStart> = batch.iter().map(|t| RolloutStart::from(*t)).collect();
        let policy = |m: &Matrix| self.policy_batch(m);
        let terminal = |s: &[f64]| env.is_terminal(s);
        let branches = model_rollout(model, &policy, &starts, n, &terminal)?;

        let tip_idx: Vec<usize> = (0..branches.len())
            .filter(|&i| !branches[i].terminal && branches[i].len() == n)
            .collect();
        let tips: Vec<&[f64]> = tip_idx.iter().map(|&i| branches[i].tip().unwrap()).collect();
        let mut tip_values = vec![0.0; branches.len()];
        if !tips.is_empty() {
            for (&i, v) in tip_idx.iter().zip(self.target_values(&tips)?) {
                tip_values[i] = v;
            }
        }

        let keep = match self.config.branch_rows {
            BranchRows::All => n,
            BranchRows::Start => 1,
        };
        let mut rows = Vec::with_capacity(batch.len() * keep);
        let mut fallback = Vec::new();
        for (i, b) in branches.iter().enumerate() {
            let rewards: Vec<f64> = b.steps.iter().map(|s| s.reward / self.value_scale).collect();
            match mpc_q_targets(&rewards, tip_values[i], b.terminal, n, gamma) {
                Ok(ys) => {
                    let mut w = 1.0;
                    for (step, y) in b.steps.iter().zip(ys).take(keep) {
                        rows.push(CriticRow {
                            state: step.state.clone(),
                            action: step.action.clone(),
                            target: y,
                            weight: w,
                        });
                        w *= gamma;
                    }
                }
                Err(Error::TruncatedBranch { .. }) => fallback.push(batch[i]),
                Err(e) => return Err(e),
            }
        }
        if !fallback.is_empty() {
            rows.extend(self.td_rows(&fallback)?);
        }
        Ok(rows)
    }

    fn update(&mut self, env: &dyn Environment) -> Result<UpdateReport> {
        let b = self.config.batch_size;
        let batch: Vec<VecTransition> = self
            .buffer
            .sample(b, &mut self.rng)?
            .into_iter()
            .cloned()
            .collect();
        let refs: Vec<&VecTransition> = batch.iter().collect();

        let mut model_losses = None;
        if let Some((model, optim)) = &mut self.model {
            let report = model.train_step(&refs, optim)?;
            self.gate.observe(report.after);
            model_losses = Some(report.after);
        }
        let gate_open = model_losses.is_some() && self.gate.enabled();
        let rows = if gate_open {
            self.branch_rows(&refs, env)?
        } else {
            self.td_rows(&refs)?
        };
        let (loss_q, grad) = self.critic.loss_and_grad(&rows, b)?;
        if !loss_q.is_finite() {
            return Err(Error::NonFinite {
                context: format!(
                    "critic loss {loss_q} after {} optimizer steps (gate open: {gate_open}, model: {model_losses:?})",
                    self.critic.optim.steps()
                ),
            });
        }
        self.critic.apply(&grad)?;

        let mut loss_actor = None;
        if let Some(actor) = &mut self.actor {
            let states: Vec<&[f64]> = refs.iter().map(|t| t.state.as_slice()).collect();
            let (la, ga) = actor.loss_and_grad(&self.critic, &states)?;
            if !la.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("actor loss {la}"),
                });
            }
            actor.apply(&ga)?;
            actor.soft_update()?;
            loss_actor = Some(la);
        }
        self.critic.soft_update()?;
        Ok(UpdateReport {
            loss_q,
            loss_actor,
            model: model_losses,
            gate_open,
        })
    }
}

impl GreedyPolicy for DeepAgent {
    fn greedy_action(&self, s: &[f64]) -> Result<Action> {
        match &self.actor {
            None => Ok(self.critic.greedy(&[s])?.remove(0)),
            Some(actor) => Ok(actor.actions(&actor.online, &[s])?.remove(0)),
        }
    }
}

/// Returns of greedy evaluation episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub returns: Vec<f64>,
}

impl Evaluation {
    /// Mean return, `None` when no episode was run.
    pub fn mean(&self) -> Option<f64> {
        (!self.returns.is_empty()).then(|| self.returns.iter().sum::<f64>() / self.returns.len() as f64)
    }
}

/// Runs `episodes` noise-free episodes and records their undiscounted returns.
pub fn evaluate(policy: &dyn GreedyPolicy, env: &mut dyn Environment, episodes: usize) -> Result<Evaluation> {
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut s = env.reset();
        let mut total = 0.0;
        loop {
            let step = env.step(&policy.greedy_action(&s)?)?;
            total += step.reward;
            if step.done() {
                break;
            }
            s = step.observation;
        }
        returns.push(total);
    }
    Ok(Evaluation { returns })
}
