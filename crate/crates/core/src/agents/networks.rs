//! Critic and actor networks with their target copies and optimizers.

use rand::Rng;

use crate::approx::{Matrix, Mlp, OptimState, OutputActivation, TargetNet};
use crate::envs::{Action, ActionSpace};
use crate::error::{Error, Result};

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = vec![input];
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

/// Raw states divided elementwise by `scale`, one row each.
pub fn normalized_states(states: &[&[f64]], scale: &[f64]) -> Result<Matrix> {
    let mut data = Vec::with_capacity(states.len() * scale.len());
    for s in states {
        if s.len() != scale.len() {
            return Err(Error::shape(format!("state of length {}", scale.len()), s.len()));
        }
        data.extend(s.iter().zip(scale).map(|(x, k)| x / k));
    }
    Matrix::from_vec(states.len(), scale.len(), data)
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// One weighted squared-error term of the critic loss.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticRow {
    pub state: Vec<f64>,
    pub action: Action,
    pub target: f64,
    pub weight: f64,
}

/// Action-value network `Q_omega` and its target copy.
///
/// Discrete spaces use one output per action over the state; boxes take the
/// concatenated `[state, action]` and return a scalar.
#[derive(Debug, Clone)]
pub struct Critic {
    pub online: Mlp,
    pub target: TargetNet,
    pub optim: OptimState,
    pub state_scale: Vec<f64>,
    pub space: ActionSpace,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(
        state_scale: Vec<f64>,
        space: ActionSpace,
        hidden: &[usize],
        lr: f64,
        zeta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let sd = state_scale.len();
        let sizes = match &space {
            ActionSpace::Discrete(n) => layer_sizes(sd, hidden, *n),
            ActionSpace::Box { bounds } => layer_sizes(sd + bounds.len(), hidden, 1),
        };
        let online = Mlp::new(&sizes, OutputActivation::Identity, rng)?;
        Self::from_net(online, state_scale, space, lr, zeta)
    }

    pub fn from_net(online: Mlp, state_scale: Vec<f64>, space: ActionSpace, lr: f64, zeta: f64) -> Result<Self> {
        let target = TargetNet::new(&online, zeta)?;
        let optim = OptimState::new(online.params().len(), lr);
        Ok(Self {
            online,
            target,
            optim,
            state_scale,
            space,
        })
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.space, ActionSpace::Discrete(_))
    }

    fn input(&self, states: &[&[f64]], actions: Option<&[&Action]>) -> Result<Matrix> {
        let x = normalized_states(states, &self.state_scale)?;
        match (&self.space, actions) {
            (ActionSpace::Discrete(_), _) => Ok(x),
            (ActionSpace::Box { .. }, Some(actions)) => {
                let mut enc = Vec::with_capacity(actions.len() * self.space.encoded_dim());
                for a in actions {
                    self.space.encode(a, &mut enc);
                }
                x.hstack(&Matrix::from_vec(actions.len(), self.space.encoded_dim(), enc)?)
            }
            (ActionSpace::Box { .. }, None) => {
                Err(Error::Config("continuous critic needs actions".into()))
            }
        }
    }

    /// Per-action values under `net` (discrete critics only).
    pub fn action_values(&self, net: &Mlp, states: &[&[f64]]) -> Result<Matrix> {
        if !self.is_discrete() {
            return Err(Error::Config("per-action values need a discrete critic".into()));
        }
        net.forward_batch(&self.input(states, None)?)
    }

    /// `Q(s, a)` under `net` for each pair.
    pub fn q_sa(&self, net: &Mlp, states: &[&[f64]], actions: &[&Action]) -> Result<Vec<f64>> {
        let out = net.forward_batch(&self.input(states, Some(actions))?)?;
        if self.is_discrete() {
            actions
                .iter()
                .enumerate()
                .map(|(i, a)| match a {
                    Action::Discrete(j) => Ok(out.get(i, *j)),
                    _ => Err(Error::Config("continuous action for discrete critic".into())),
                })
                .collect()
        } else {
            Ok(out.into_vec())
        }
    }

    /// Greedy actions of the online critic.
    pub fn greedy(&self, states: &[&[f64]]) -> Result<Vec<Action>> {
        let q = self.action_values(&self.online, states)?;
        Ok((0..q.rows()).map(|i| Action::Discrete(argmax(q.row(i)))).collect())
    }

    /// `sum_i w_i (Q(s_i, a_i) - y_i)^2 / batch` and its parameter gradient.
    pub fn loss_and_grad(&self, rows: &[CriticRow], batch: usize) -> Result<(f64, Vec<f64>)> {
        if batch == 0 {
            return Err(Error::InsufficientSamples {
                requested: 1,
                available: 0,
            });
        }
        let states: Vec<&[f64]> = rows.iter().map(|r| r.state.as_slice()).collect();
        let actions: Vec<&Action> = rows.iter().map(|r| &r.action).collect();
        let cache = self.online.forward_cached(self.input(&states, Some(&actions))?)?;
        let out = cache.output();
        let b = batch as f64;
        let mut up = Matrix::zeros(out.rows(), out.cols());
        let mut loss = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let col = match (&row.action, self.is_discrete()) {
                (Action::Discrete(j), true) => *j,
                (Action::Continuous(_), false) => 0,
                _ => return Err(Error::Config("action kind does not match critic".into())),
            };
            let err = out.get(i, col) - row.target;
            loss += row.weight * err * err;
            up.set(i, col, 2.0 * row.weight * err / b);
        }
        let mut grad = vec![0.0; self.online.params().len()];
        self.online.backward(&cache, &up, &mut grad, false)?;
        Ok((loss / b, grad))
    }

    pub fn apply(&mut self, grad: &[f64]) -> Result<()> {
        self.optim.step(self.online.params_mut(), grad)
    }

    pub fn soft_update(&mut self) -> Result<()> {
        self.target.soft_update(&self.online)
    }
}

/// Deterministic policy `pi_beta` with tanh-bounded outputs and a target copy.
#[derive(Debug, Clone)]
pub struct Actor {
    pub online: Mlp,
    pub target: TargetNet,
    pub optim: OptimState,
    pub state_scale: Vec<f64>,
    pub bounds: Vec<f64>,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(
        state_scale: Vec<f64>,
        bounds: Vec<f64>,
        hidden: &[usize],
        lr: f64,
        zeta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let sizes = layer_sizes(state_scale.len(), hidden, bounds.len());
        let mut online = Mlp::new(
            &sizes,
            OutputActivation::Tanh {
                scale: bounds.clone(),
            },
            rng,
        )?;
        // start near the centre of the action box
        online.scale_last_layer(0.1);
        Self::from_net(online, state_scale, bounds, lr, zeta)
    }

    pub fn from_net(online: Mlp, state_scale: Vec<f64>, bounds: Vec<f64>, lr: f64, zeta: f64) -> Result<Self> {
        let target = TargetNet::new(&online, zeta)?;
        let optim = OptimState::new(online.params().len(), lr);
        Ok(Self {
            online,
            target,
            optim,
            state_scale,
            bounds,
        })
    }

    /// Actions of `net` for each state, as raw action vectors.
    pub fn actions(&self, net: &Mlp, states: &[&[f64]]) -> Result<Vec<Action>> {
        let out = net.forward_batch(&normalized_states(states, &self.state_scale)?)?;
        Ok((0..out.rows())
            .map(|i| Action::Continuous(out.row(i).to_vec()))
            .collect())
    }

    /// `-mean_s Q(s, pi(s))` and its gradient with respect to the actor
    /// parameters; the critic is held fixed.
    pub fn loss_and_grad(&self, critic: &Critic, states: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
        if states.is_empty() {
            return Err(Error::InsufficientSamples {
                requested: 1,
                available: 0,
            });
        }
        let b = states.len() as f64;
        let actor_cache = self
            .online
            .forward_cached(normalized_states(states, &self.state_scale)?)?;
        let raw = actor_cache.output();
        let actions: Vec<Action> = (0..raw.rows())
            .map(|i| Action::Continuous(raw.row(i).to_vec()))
            .collect();
        let refs: Vec<&Action> = actions.iter().collect();
        let critic_cache = critic.online.forward_cached(critic.input(states, Some(&refs))?)?;
        let q = critic_cache.output();
        let loss = -q.as_slice().iter().sum::<f64>() / b;

        let up = Matrix::from_vec(q.rows(), 1, vec![-1.0 / b; q.rows()])?;
        let mut scratch = vec![0.0; critic.online.params().len()];
        let d_input = critic
            .online
            .backward(&critic_cache, &up, &mut scratch, true)?
            .expect("input gradient requested");
        let sd = self.state_scale.len();
        let mut d_action = d_input.columns(sd, self.bounds.len());
        for i in 0..d_action.rows() {
            for (d, bound) in d_action.row_mut(i).iter_mut().zip(&self.bounds) {
                *d /= bound;
            }
        }
        let mut grad = vec![0.0; self.online.params().len()];
        self.online.backward(&actor_cache, &d_action, &mut grad, false)?;
        Ok((loss, grad))
    }

    pub fn apply(&mut self, grad: &[f64]) -> Result<()> {
        self.optim.step(self.online.params_mut(), grad)
    }

    pub fn soft_update(&mut self) -> Result<()> {
        self.target.soft_update(&self.online)
    }
}
