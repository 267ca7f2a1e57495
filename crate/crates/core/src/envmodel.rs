//! Learned deterministic environment models.
//!
//! A model maps `(s, a)` to a predicted next state and reward, either with two
//! networks (dynamics and reward) or with one network emitting both. All
//! losses are measured in normalized units: state dimension `i` is divided by
//! `state_scale[i]` and rewards by `reward_scale`, so a single availability
//! threshold means the same thing on every environment.

use rand::Rng;

use crate::approx::{Matrix, Mlp, OptimState, OutputActivation};
use crate::envs::{Action, ActionSpace};
use crate::error::{Error, Result};
use crate::mdp::Transition;

pub type VecTransition = Transition<Vec<f64>, Action>;

/// Maps raw states, actions and rewards to network units and back.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCodec {
    pub state_scale: Vec<f64>,
    pub reward_scale: f64,
    pub action_space: ActionSpace,
    /// Predict the normalized state change instead of the next state.
    pub residual: bool,
}

impl ModelCodec {
    /// Unit scales, absolute targets.
    pub fn identity(state_dim: usize, action_space: ActionSpace) -> Self {
        Self {
            state_scale: vec![1.0; state_dim],
            reward_scale: 1.0,
            action_space,
            residual: false,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_scale.len()
    }

    pub fn input_dim(&self) -> usize {
        self.state_dim() + self.action_space.encoded_dim()
    }

    fn check_state(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.state_dim() {
            return Err(Error::shape(format!("state of length {}", self.state_dim()), s.len()));
        }
        Ok(())
    }

    fn encode_input(&self, s: &[f64], a: &Action, out: &mut Vec<f64>) {
        out.extend(s.iter().zip(&self.state_scale).map(|(x, k)| x / k));
        self.action_space.encode(a, out);
    }

    fn inputs<'a, I>(&self, pairs: I) -> Result<Matrix>
    where
        I: IntoIterator<Item = (&'a [f64], &'a Action)>,
    {
        let mut data = Vec::new();
        let mut rows = 0;
        for (s, a) in pairs {
            self.check_state(s)?;
            self.encode_input(s, a, &mut data);
            rows += 1;
        }
        Matrix::from_vec(rows, self.input_dim(), data)
    }

    /// Normalized regression target for the state head.
    fn state_target(&self, s: &[f64], next: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            let k = self.state_scale[i];
            out[i] = if self.residual {
                (next[i] - s[i]) / k
            } else {
                next[i] / k
            };
        }
    }

    fn decode_state(&self, s: &[f64], head: &[f64]) -> Vec<f64> {
        head.iter()
            .enumerate()
            .map(|(i, o)| {
                let k = self.state_scale[i];
                if self.residual {
                    s[i] + o * k
                } else {
                    o * k
                }
            })
            .collect()
    }
}

/// `P_theta` and `R_tau` as two networks.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparateModel {
    pub dynamics: Mlp,
    pub reward: Mlp,
}

/// One network `PR_psi` emitting `state_dim` state outputs then the reward.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedModel {
    pub net: Mlp,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelNets {
    Separate(SeparateModel),
    Combined(CombinedModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvModel {
    pub codec: ModelCodec,
    pub nets: ModelNets,
}

/// Minibatch losses in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelLosses {
    /// Mean squared state error.
    pub state: f64,
    /// Mean squared reward error.
    pub reward: f64,
    /// `state + lambda * reward` for combined models.
    pub combined: Option<f64>,
}

/// Adam states matching the model's networks.
#[derive(Debug, Clone)]
pub enum ModelOptim {
    Separate {
        dynamics: OptimState,
        reward: OptimState,
    },
    Combined(OptimState),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub before: ModelLosses,
    pub after: ModelLosses,
}

fn hidden_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

impl EnvModel {
    pub fn separate<R: Rng + ?Sized>(codec: ModelCodec, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let input = codec.input_dim();
        let dynamics = Mlp::new(
            &hidden_sizes(input, hidden, codec.state_dim()),
            OutputActivation::Identity,
            rng,
        )?;
        let reward = Mlp::new(&hidden_sizes(input, hidden, 1), OutputActivation::Identity, rng)?;
        Ok(Self {
            codec,
            nets: ModelNets::Separate(SeparateModel { dynamics, reward }),
        })
    }

    pub fn combined<R: Rng + ?Sized>(
        codec: ModelCodec,
        hidden: &[usize],
        lambda: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("reward weight must be positive, got {lambda}")));
        }
        let net = Mlp::new(
            &hidden_sizes(codec.input_dim(), hidden, codec.state_dim() + 1),
            OutputActivation::Identity,
            rng,
        )?;
        Ok(Self {
            codec,
            nets: ModelNets::Combined(CombinedModel { net, lambda }),
        })
    }

    /// Wraps existing networks after checking their shapes.
    pub fn from_nets(codec: ModelCodec, nets: ModelNets) -> Result<Self> {
        let (input, sd) = (codec.input_dim(), codec.state_dim());
        let ok = match &nets {
            ModelNets::Separate(m) => {
                m.dynamics.input_dim() == input
                    && m.reward.input_dim() == input
                    && m.dynamics.output_dim() == sd
                    && m.reward.output_dim() == 1
            }
            ModelNets::Combined(m) => {
                if !(m.lambda > 0.0) {
                    return Err(Error::Domain("reward weight must be positive".into()));
                }
                m.net.input_dim() == input && m.net.output_dim() == sd + 1
            }
        };
        if !ok {
            return Err(Error::shape(
                format!("networks mapping {input} inputs to {sd} states + 1 reward"),
                "mismatched networks",
            ));
        }
        Ok(Self { codec, nets })
    }

    pub fn optimizer(&self, lr_dynamics: f64, lr_reward: f64, lr_combined: f64) -> ModelOptim {
        match &self.nets {
            ModelNets::Separate(m) => ModelOptim::Separate {
                dynamics: OptimState::new(m.dynamics.params().len(), lr_dynamics),
                reward: OptimState::new(m.reward.params().len(), lr_reward),
            },
            ModelNets::Combined(m) => {
                ModelOptim::Combined(OptimState::new(m.net.params().len(), lr_combined))
            }
        }
    }

    /// Raw network heads for a batch: `(state_head, reward_head)`.
    fn heads(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        match &self.nets {
            ModelNets::Separate(m) => {
                let s = m.dynamics.forward_batch(x)?;
                let r = m.reward.forward_batch(x)?.into_vec();
                Ok((s, r))
            }
            ModelNets::Combined(m) => {
                let out = m.net.forward_batch(x)?;
                let sd = self.codec.state_dim();
                let r = (0..out.rows()).map(|i| out.get(i, sd)).collect();
                Ok((out.columns(0, sd), r))
            }
        }
    }

    /// Predicted `(next_state, reward)` for each `(state, action)` pair.
    pub fn predict_batch<'a, I>(&self, pairs: I) -> Result<Vec<(Vec<f64>, f64)>>
    where
        I: IntoIterator<Item = (&'a [f64], &'a Action)>,
        I::IntoIter: Clone,
    {
        let pairs = pairs.into_iter();
        let x = self.codec.inputs(pairs.clone())?;
        let (sh, rh) = self.heads(&x)?;
        Ok(pairs
            .enumerate()
            .map(|(i, (s, _))| {
                (
                    self.codec.decode_state(s, sh.row(i)),
                    rh[i] * self.codec.reward_scale,
                )
            })
            .collect())
    }

    pub fn predict(&self, s: &[f64], a: &Action) -> Result<(Vec<f64>, f64)> {
        Ok(self.predict_batch([(s, a)])?.remove(0))
    }

    fn targets(&self, batch: &[&VecTransition]) -> Result<(Matrix, Matrix, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::InsufficientSamples {
                requested: 1,
                available: 0,
            });
        }
        let x = self.codec.inputs(batch.iter().map(|t| (t.state.as_slice(), &t.action)))?;
        let sd = self.codec.state_dim();
        let mut ts = Matrix::zeros(batch.len(), sd);
        for (i, t) in batch.iter().enumerate() {
            self.codec.check_state(&t.next_state)?;
            self.codec.state_target(&t.state, &t.next_state, ts.row_mut(i));
        }
        let tr = batch.iter().map(|t| t.reward / self.codec.reward_scale).collect();
        Ok((x, ts, tr))
    }

    fn losses_from(&self, sh: &Matrix, rh: &[f64], ts: &Matrix, tr: &[f64]) -> ModelLosses {
        let b = ts.rows() as f64;
        let state = sh
            .as_slice()
            .iter()
            .zip(ts.as_slice())
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
            / b;
        let reward = rh.iter().zip(tr).map(|(o, t)| (o - t) * (o - t)).sum::<f64>() / b;
        let combined = match &self.nets {
            ModelNets::Combined(m) => Some(state + m.lambda * reward),
            ModelNets::Separate(_) => None,
        };
        ModelLosses {
            state,
            reward,
            combined,
        }
    }

    /// Mean squared state and reward errors over the batch.
    pub fn losses(&self, batch: &[&VecTransition]) -> Result<ModelLosses> {
        let (x, ts, tr) = self.targets(batch)?;
        let (sh, rh) = self.heads(&x)?;
        Ok(self.losses_from(&sh, &rh, &ts, &tr))
    }

    /// Losses and their gradients: one vector per network (dynamics then
    /// reward for separate models, the joint network otherwise).
    pub fn loss_gradients(&self, batch: &[&VecTransition]) -> Result<(ModelLosses, Vec<Vec<f64>>)> {
        let (x, ts, tr) = self.targets(batch)?;
        let b = batch.len() as f64;
        let sd = self.codec.state_dim();
        match &self.nets {
            ModelNets::Separate(m) => {
                let cd = m.dynamics.forward_cached(x.clone())?;
                let cr = m.reward.forward_cached(x)?;
                let rh = cr.output().as_slice().to_vec();
                let losses = self.losses_from(cd.output(), &rh, &ts, &tr);

                let mut up_d = Matrix::zeros(batch.len(), sd);
                for ((u, o), t) in up_d
                    .as_mut_slice()
                    .iter_mut()
                    .zip(cd.output().as_slice())
                    .zip(ts.as_slice())
                {
                    *u = 2.0 * (o - t) / b;
                }
                let up_r = Matrix::from_vec(
                    batch.len(),
                    1,
                    rh.iter().zip(&tr).map(|(o, t)| 2.0 * (o - t) / b).collect(),
                )?;
                let mut gd = vec![0.0; m.dynamics.params().len()];
                let mut gr = vec![0.0; m.reward.params().len()];
                m.dynamics.backward(&cd, &up_d, &mut gd, false)?;
                m.reward.backward(&cr, &up_r, &mut gr, false)?;
                Ok((losses, vec![gd, gr]))
            }
            ModelNets::Combined(m) => {
                let cache = m.net.forward_cached(x)?;
                let out = cache.output();
                let sh = out.columns(0, sd);
                let rh: Vec<f64> = (0..out.rows()).map(|i| out.get(i, sd)).collect();
                let losses = self.losses_from(&sh, &rh, &ts, &tr);
                let mut up = Matrix::zeros(batch.len(), sd + 1);
                for i in 0..batch.len() {
                    for j in 0..sd {
                        up.set(i, j, 2.0 * (sh.get(i, j) - ts.get(i, j)) / b);
                    }
                    up.set(i, sd, 2.0 * m.lambda * (rh[i] - tr[i]) / b);
                }
                let mut g = vec![0.0; m.net.params().len()];
                m.net.backward(&cache, &up, &mut g, false)?;
                Ok((losses, vec![g]))
            }
        }
    }

    /// One optimizer step on the applicable loss; reports losses on the same
    /// batch before and after the step.
    pub fn train_step(&mut self, batch: &[&VecTransition], optim: &mut ModelOptim) -> Result<TrainReport> {
        let (before, grads) = self.loss_gradients(batch)?;
        let total = before.combined.unwrap_or(before.state + before.reward);
        if !total.is_finite() {
            return Err(Error::NonFinite {
                context: format!("model loss {before:?}"),
            });
        }
        match (&mut self.nets, optim) {
            (ModelNets::Separate(m), ModelOptim::Separate { dynamics, reward }) => {
                dynamics.step(m.dynamics.params_mut(), &grads[0])?;
                reward.step(m.reward.params_mut(), &grads[1])?;
            }
            (ModelNets::Combined(m), ModelOptim::Combined(opt)) => {
                opt.step(m.net.params_mut(), &grads[0])?;
            }
            _ => return Err(Error::Config("optimizer does not match model kind".into())),
        }
        let after = self.losses(batch)?;
        Ok(TrainReport { before, after })
    }
}

/// True iff every applicable loss is strictly below `epsilon_m`. An empty
/// list (no estimate yet) keeps the gate closed.
pub fn gate_enabled(losses: &[f64], epsilon_m: f64) -> bool {
    !losses.is_empty() && losses.iter().all(|&l| l < epsilon_m)
}

/// Availability gate over exponentially smoothed model losses.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGate {
    pub epsilon_m: f64,
    /// Weight kept from the previous estimate on each update.
    pub smoothing: f64,
    estimate: Option<ModelLosses>,
}

impl ModelGate {
    pub fn new(epsilon_m: f64, smoothing: f64) -> Self {
        Self {
            epsilon_m,
            smoothing,
            estimate: None,
        }
    }

    pub fn estimate(&self) -> Option<ModelLosses> {
        self.estimate
    }

    pub fn observe(&mut self, latest: ModelLosses) {
        let k = self.smoothing;
        let blend = |old: f64, new: f64| k * old + (1.0 - k) * new;
        self.estimate = Some(match self.estimate {
            None => latest,
            Some(old) => ModelLosses {
                state: blend(old.state, latest.state),
                reward: blend(old.reward, latest.reward),
                combined: match (old.combined, latest.combined) {
                    (Some(o), Some(n)) => Some(blend(o, n)),
                    (_, n) => n,
                },
            },
        });
    }

    /// Losses the gate tests: `L_psi` for combined models, otherwise
    /// `L_theta` and `L_tau`.
    pub fn tested_losses(&self) -> Vec<f64> {
        match self.estimate {
            None => Vec::new(),
            Some(ModelLosses {
                combined: Some(c), ..
            }) => vec![c],
            Some(e) => vec![e.state, e.reward],
        }
    }

    pub fn enabled(&self) -> bool {
        gate_enabled(&self.tested_losses(), self.epsilon_m)
    }
}

/// One predicted step of a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedStep {
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub steps: Vec<PredictedStep>,
    /// The last step ends in a termination state.
    pub terminal: bool,
    /// Rollout stopped early on a non-finite prediction.
    pub diverged: bool,
}

impl Branch {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// State `s_{k+N}` at the tip of the branch.
    pub fn tip(&self) -> Option<&[f64]> {
        self.steps.last().map(|s| s.next_state.as_slice())
    }
}

/// Where a branch starts: a real state-action pair and whether the real
/// transition from it terminated.
#[derive(Debug, Clone, Copy)]
pub struct RolloutStart<'a> {
    pub state: &'a [f64],
    pub action: &'a Action,
    pub terminal: bool,
}

impl<'a> From<&'a VecTransition> for RolloutStart<'a> {
    fn from(t: &'a VecTransition) -> Self {
        Self {
            state: &t.state,
            action: &t.action,
            terminal: t.done,
        }
    }
}

/// Multi-step prediction for a batch of starts. Step 0 predicts from the
/// real pair; step `n >= 1` acts with `policy` on the predicted state. Each
/// branch has `horizon` steps unless it reaches a termination state (per
/// `is_terminal`, or the real transition's flag at step 0) or a non-finite
/// prediction, which truncates it at the last finite step.
pub fn model_rollout(
    model: &EnvModel,
    policy: &dyn Fn(&Matrix) -> Result<Vec<Action>>,
    starts: &[RolloutStart<'_>],
    horizon: usize,
    is_terminal: &dyn Fn(&[f64]) -> bool,
) -> Result<Vec<Branch>> {
    if horizon == 0 {
        return Err(Error::Domain("rollout horizon must be at least 1".into()));
    }
    let mut branches: Vec<Branch> = starts
        .iter()
        .map(|_| Branch {
            steps: Vec::with_capacity(horizon),
            terminal: false,
            diverged: false,
        })
        .collect();
    let mut active: Vec<usize> = (0..starts.len()).collect();
    let mut states: Vec<Vec<f64>> = starts.iter().map(|s| s.state.to_vec()).collect();
    let mut actions: Vec<Action> = starts.iter().map(|s| s.action.clone()).collect();

    for n in 0..horizon {
        if active.is_empty() {
            break;
        }
        if n > 0 {
            let rows: Vec<&[f64]> = active.iter().map(|&i| states[i].as_slice()).collect();
            let chosen = policy(&Matrix::from_rows(&rows)?)?;
            for (&i, a) in active.iter().zip(chosen) {
                actions[i] = a;
            }
        }
        let preds = model.predict_batch(
            active
                .iter()
                .map(|&i| (states[i].as_slice(), &actions[i])),
        )?;
        let mut still = Vec::with_capacity(active.len());
        for (&i, (next, reward)) in active.iter().zip(preds) {
            let b = &mut branches[i];
            if !reward.is_finite() || next.iter().any(|v| !v.is_finite()) {
                b.diverged = true;
                continue;
            }
            let terminal = if n == 0 {
                starts[i].terminal
            } else {
                is_terminal(&next)
            };
            b.steps.push(PredictedStep {
                state: std::mem::take(&mut states[i]),
                action: actions[i].clone(),
                reward,
                next_state: next.clone(),
            });
            states[i] = next;
            if terminal {
                b.terminal = true;
            } else {
                still.push(i);
            }
        }
        active = still;
    }
    Ok(branches)
}
