use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PendulumParams {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub dt: f64,
    pub max_torque: f64,
    pub max_speed: f64,
    pub step_cap: usize,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 10.0,
            mass: 1.0,
            length: 1.0,
            dt: 0.05,
            max_torque: 2.0,
            max_speed: 8.0,
            step_cap: 200,
        }
    }
}

/// Angle 0 is upright.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PendulumState {
    pub angle: f64,
    pub angular_velocity: f64,
}

impl PendulumState {
    pub fn observation(self) -> Vec<f64> {
        vec![self.angle.cos(), self.angle.sin(), self.angular_velocity]
    }
}

/// Wraps to `(-pi, pi]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// One semi-implicit Euler step of the torque-driven pendulum. The reward is
/// charged on the pre-step state and the applied (clipped) torque.
pub fn pendulum_step(p: &PendulumParams, s: PendulumState, torque: f64) -> (PendulumState, f64, bool) {
    let u = torque.clamp(-p.max_torque, p.max_torque);
    let theta = wrap_angle(s.angle);
    let reward = -(theta * theta + 0.1 * s.angular_velocity * s.angular_velocity + 0.001 * u * u);
    let acc = 3.0 * p.gravity / (2.0 * p.length) * theta.sin()
        + 3.0 / (p.mass * p.length * p.length) * u;
    let velocity = (s.angular_velocity + acc * p.dt).clamp(-p.max_speed, p.max_speed);
    let next = PendulumState {
        angle: wrap_angle(theta + velocity * p.dt),
        angular_velocity: velocity,
    };
    (next, reward, false)
}

#[derive(Debug, Clone)]
pub struct Pendulum {
    params: PendulumParams,
    state: PendulumState,
    steps: usize,
    rng: SimRng,
}

impl Pendulum {
    pub fn new(params: PendulumParams, rng: SimRng) -> Self {
        Self {
            params,
            state: PendulumState::default(),
            steps: 0,
            rng,
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }
}

impl Environment for Pendulum {
    fn name(&self) -> &'static str {
        "pd"
    }

    fn observation_dim(&self) -> usize {
        3
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Box {
            bounds: vec![self.params.max_torque],
        }
    }

    fn observation_scale(&self) -> Vec<f64> {
        vec![1.0, 1.0, self.params.max_speed]
    }

    fn reward_scale(&self) -> f64 {
        16.0
    }

    fn reset(&mut self) -> Vec<f64> {
        self.state = PendulumState {
            angle: wrap_angle(self.rng.random_range(-PI..PI)),
            angular_velocity: self.rng.random_range(-1.0..1.0),
        };
        self.steps = 0;
        self.state.observation()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let torque = match action {
            Action::Continuous(a) if a.len() == 1 => a[0],
            other => return Err(Error::shape("1-d continuous action", format!("{other:?}"))),
        };
        let (next, reward, _) = pendulum_step(&self.params, self.state, torque);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            observation: next.observation(),
            reward,
            terminal: false,
            truncated: self.steps >= self.params.step_cap,
        })
    }
}
