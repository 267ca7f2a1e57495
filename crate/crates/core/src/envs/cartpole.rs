use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub half_length: f64,
    pub force: f64,
    pub dt: f64,
    pub angle_limit: f64,
    pub position_limit: f64,
    pub step_cap: usize,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force: 10.0,
            dt: 0.02,
            angle_limit: 12.0_f64.to_radians(),
            position_limit: 2.4,
            step_cap: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub cart_position: f64,
    pub cart_velocity: f64,
    pub pole_angle: f64,
    pub pole_angular_velocity: f64,
}

impl CartPoleState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![
            self.cart_position,
            self.cart_velocity,
            self.pole_angle,
            self.pole_angular_velocity,
        ]
    }

    pub fn mirrored(self) -> Self {
        Self {
            cart_position: -self.cart_position,
            cart_velocity: -self.cart_velocity,
            pole_angle: -self.pole_angle,
            pole_angular_velocity: -self.pole_angular_velocity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Push {
    Left = 0,
    Right = 1,
}

impl Push {
    pub fn mirrored(self) -> Self {
        match self {
            Push::Left => Push::Right,
            Push::Right => Push::Left,
        }
    }
}

fn out_of_limits(p: &CartPoleParams, x: f64, theta: f64) -> bool {
    x.abs() > p.position_limit || theta.abs() > p.angle_limit
}

/// One explicit Euler step of the cart-pole equations of motion. Reward is
/// +1 for every step taken; `done` reports limit violation only (the step
/// cap is enforced by [`CartPole`]).
pub fn cartpole_step(p: &CartPoleParams, s: CartPoleState, a: Push) -> (CartPoleState, f64, bool) {
    let force = match a {
        Push::Left => -p.force,
        Push::Right => p.force,
    };
    let total_mass = p.cart_mass + p.pole_mass;
    let pole_moment = p.pole_mass * p.half_length;
    let (sin, cos) = s.pole_angle.sin_cos();
    let temp = (force + pole_moment * s.pole_angular_velocity * s.pole_angular_velocity * sin)
        / total_mass;
    let angular_acc = (p.gravity * sin - cos * temp)
        / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos * cos / total_mass));
    let linear_acc = temp - pole_moment * angular_acc * cos / total_mass;

    let next = CartPoleState {
        cart_position: s.cart_position + p.dt * s.cart_velocity,
        cart_velocity: s.cart_velocity + p.dt * linear_acc,
        pole_angle: s.pole_angle + p.dt * s.pole_angular_velocity,
        pole_angular_velocity: s.pole_angular_velocity + p.dt * angular_acc,
    };
    let done = out_of_limits(p, next.cart_position, next.pole_angle);
    (next, 1.0, done)
}

#[derive(Debug, Clone)]
pub struct CartPole {
    params: CartPoleParams,
    state: CartPoleState,
    steps: usize,
    rng: SimRng,
}

impl CartPole {
    pub fn new(params: CartPoleParams, rng: SimRng) -> Self {
        Self {
            params,
            state: CartPoleState::default(),
            steps: 0,
            rng,
        }
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }
}

impl Environment for CartPole {
    fn name(&self) -> &'static str {
        "cp"
    }

    fn observation_dim(&self) -> usize {
        4
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(2)
    }

    fn observation_scale(&self) -> Vec<f64> {
        vec![self.params.position_limit, 3.0, self.params.angle_limit, 3.5]
    }

    fn reward_scale(&self) -> f64 {
        1.0
    }

    fn reset(&mut self) -> Vec<f64> {
        let mut draw = || self.rng.random_range(-0.05..0.05);
        self.state = CartPoleState {
            cart_position: draw(),
            cart_velocity: draw(),
            pole_angle: draw(),
            pole_angular_velocity: draw(),
        };
        self.steps = 0;
        self.state.to_vec()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let push = match action {
            Action::Discrete(0) => Push::Left,
            Action::Discrete(1) => Push::Right,
            other => return Err(Error::shape("discrete action in {0, 1}", format!("{other:?}"))),
        };
        let (next, reward, terminal) = cartpole_step(&self.params, self.state, push);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            observation: next.to_vec(),
            reward,
            terminal,
            truncated: !terminal && self.steps >= self.params.step_cap,
        })
    }

    fn is_terminal(&self, observation: &[f64]) -> bool {
        out_of_limits(&self.params, observation[0], observation[2])
    }
}
