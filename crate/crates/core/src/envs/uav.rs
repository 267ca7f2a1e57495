//! Point-mass UAV flying to a destination past one moving spherical obstacle.
//!
//! Steering is expressed relative to the line of sight to the destination:
//! yaw deflects the flight direction sideways, pitch deflects it vertically,
//! and roll rotates that deflection about the line of sight. The observation
//! holds no heading, so flight direction must be a function of it for the
//! process to stay Markov.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, Environment, Step};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add_scaled(a: Vec3, b: Vec3, k: f64) -> Vec3 {
    [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]]
}

fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UavParams {
    pub rho_o: f64,
    pub rho_u: f64,
    pub d_com: f64,
    pub d_thr: f64,
    pub r_a: f64,
    /// Bonus paid on arrival.
    pub completion_bonus: f64,
    /// Constant added to every non-collision reward.
    pub r_c: f64,
    pub r_d: f64,
    pub speed: f64,
    pub dt: f64,
    pub step_cap: usize,
    pub action_bound: f64,
    pub arena: Vec3,
    pub obstacle_speed: f64,
}

impl Default for UavParams {
    fn default() -> Self {
        Self {
            rho_o: 1.5,
            rho_u: 0.1,
            d_com: 0.5,
            d_thr: 0.4,
            r_a: 1.0,
            completion_bonus: 3.0,
            r_c: 0.0,
            r_d: 0.3,
            speed: 1.0,
            dt: 0.1,
            step_cap: 200,
            action_bound: FRAC_PI_4,
            arena: [20.0, 20.0, 10.0],
            obstacle_speed: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavWorld {
    pub p_u: Vec3,
    pub p_o: Vec3,
    pub p_e: Vec3,
    pub p_s: Vec3,
    pub v_o: Vec3,
    /// Unit flight direction of the last step.
    pub heading: Vec3,
    pub steps: usize,
    pub params: UavParams,
}

impl UavWorld {
    pub fn d_ou(&self) -> f64 {
        norm(sub(self.p_o, self.p_u))
    }

    pub fn d_eu(&self) -> f64 {
        norm(sub(self.p_e, self.p_u))
    }

    pub fn d_es(&self) -> f64 {
        norm(sub(self.p_e, self.p_s))
    }

    pub fn arrived(&self) -> bool {
        self.d_eu() < self.params.d_com
    }
}

/// Roll, yaw and pitch commands in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UavAction {
    pub roll: f64,
    pub yaw: f64,
    pub pitch: f64,
}

impl UavAction {
    pub fn clipped(self, bound: f64) -> Self {
        Self {
            roll: self.roll.clamp(-bound, bound),
            yaw: self.yaw.clamp(-bound, bound),
            pitch: self.pitch.clamp(-bound, bound),
        }
    }
}

/// The 9-vector `[(p_o - p_u)(d_ou - (rho_o + rho_u))/d_ou; p_e - p_u; v_o]`.
pub fn uav_observe(w: &UavWorld) -> Result<[f64; 9]> {
    let rel = sub(w.p_o, w.p_u);
    let d_ou = norm(rel);
    if d_ou == 0.0 {
        return Err(Error::DegenerateGeometry(
            "UAV and obstacle centers coincide".into(),
        ));
    }
    let k = (d_ou - (w.params.rho_o + w.params.rho_u)) / d_ou;
    let goal = sub(w.p_e, w.p_u);
    Ok([
        rel[0] * k,
        rel[1] * k,
        rel[2] * k,
        goal[0],
        goal[1],
        goal[2],
        w.v_o[0],
        w.v_o[1],
        w.v_o[2],
    ])
}

/// Threat shaping: negative inside the threat shell around the obstacle.
pub fn uav_threat(p: &UavParams, d_ou: f64) -> f64 {
    let shell = p.rho_o + p.rho_u + p.d_thr;
    if d_ou < shell {
        (d_ou - shell) / shell - p.r_d
    } else {
        0.0
    }
}

pub fn uav_reward(w: &UavWorld) -> f64 {
    let p = &w.params;
    let contact = p.rho_o + p.rho_u;
    let d_ou = w.d_ou();
    if d_ou < contact {
        return (d_ou - contact) / contact - p.r_a;
    }
    let d_eu = w.d_eu();
    let progress = -d_eu / w.d_es() + uav_threat(p, d_ou) + p.r_c;
    if d_eu < p.d_com {
        progress + p.completion_bonus
    } else {
        progress
    }
}

/// Flight direction for a command: the line of sight `los` deflected by yaw
/// (lateral) and pitch (vertical), with the deflection rotated by roll.
fn flight_direction(los: Vec3, a: UavAction) -> Vec3 {
    let n = norm(los);
    if n == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let f = scale(los, 1.0 / n);
    let up = [0.0, 0.0, 1.0];
    let mut lateral = cross(up, f);
    let ln = norm(lateral);
    lateral = if ln < 1e-9 {
        [0.0, 1.0, 0.0]
    } else {
        scale(lateral, 1.0 / ln)
    };
    let vertical = cross(f, lateral);
    let (sr, cr) = a.roll.sin_cos();
    let yaw = a.yaw * cr - a.pitch * sr;
    let pitch = a.yaw * sr + a.pitch * cr;
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let horizontal = add_scaled(scale(f, cy), lateral, sy);
    add_scaled(scale(horizontal, cp), vertical, sp)
}

/// Advances the world by one interval. Returns the post-move world, its
/// reward, and whether the episode ended (arrival or step cap).
pub fn uav_step(w: &UavWorld, a: UavAction) -> (UavWorld, f64, bool) {
    let p = &w.params;
    let a = a.clipped(p.action_bound);
    let mut next = w.clone();
    let heading = flight_direction(sub(w.p_e, w.p_u), a);
    next.heading = heading;
    next.p_u = add_scaled(w.p_u, heading, p.speed * p.dt);
    next.p_o = add_scaled(w.p_o, w.v_o, p.dt);
    for i in 0..3 {
        if next.p_o[i] < 0.0 {
            next.p_o[i] = -next.p_o[i];
            next.v_o[i] = -next.v_o[i];
        } else if next.p_o[i] > p.arena[i] {
            next.p_o[i] = 2.0 * p.arena[i] - next.p_o[i];
            next.v_o[i] = -next.v_o[i];
        }
    }
    next.steps += 1;
    let reward = uav_reward(&next);
    let done = next.arrived() || next.steps >= p.step_cap;
    (next, reward, done)
}

#[derive(Debug, Clone)]
pub struct Uav {
    params: UavParams,
    world: UavWorld,
    rng: SimRng,
}

impl Uav {
    pub fn new(params: UavParams, rng: SimRng) -> Self {
        let world = UavWorld {
            p_u: [4.0, 4.0, 4.0],
            p_o: [7.5, 7.5, 5.0],
            p_e: [11.0, 11.0, 6.0],
            p_s: [4.0, 4.0, 4.0],
            v_o: [0.0; 3],
            heading: [1.0, 0.0, 0.0],
            steps: 0,
            params: params.clone(),
        };
        Self { params, world, rng }
    }

    pub fn world(&self) -> &UavWorld {
        &self.world
    }

    fn jitter(&mut self, centre: Vec3, half_width: f64) -> Vec3 {
        let mut out = centre;
        for c in &mut out {
            *c += self.rng.random_range(-half_width..half_width);
        }
        out
    }
}

impl Environment for Uav {
    fn name(&self) -> &'static str {
        "uav"
    }

    fn observation_dim(&self) -> usize {
        9
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Box {
            bounds: vec![self.params.action_bound; 3],
        }
    }

    fn observation_scale(&self) -> Vec<f64> {
        let v = self.params.obstacle_speed.max(1e-6);
        vec![5.0, 5.0, 5.0, 5.0, 5.0, 5.0, v, v, v]
    }

    fn reward_scale(&self) -> f64 {
        1.0
    }

    fn reset(&mut self) -> Vec<f64> {
        let p_s = self.jitter([4.0, 4.0, 4.0], 1.0);
        let p_e = self.jitter([11.0, 11.0, 6.0], 1.0);
        let mid = scale(add_scaled(p_s, p_e, 1.0), 0.5);
        let p_o = self.jitter(mid, 0.5);
        let dir: Vec3 = [
            self.rng.sample(StandardNormal),
            self.rng.sample(StandardNormal),
            self.rng.sample(StandardNormal),
        ];
        let v_o = scale(dir, self.params.obstacle_speed / norm(dir).max(1e-12));
        let los = sub(p_e, p_s);
        self.world = UavWorld {
            p_u: p_s,
            p_o,
            p_e,
            p_s,
            v_o,
            heading: scale(los, 1.0 / norm(los)),
            steps: 0,
            params: self.params.clone(),
        };
        uav_observe(&self.world)
            .expect("reset places the obstacle away from the UAV")
            .to_vec()
    }

    fn step(&mut self, action: &Action) -> Result<Step> {
        let a = match action {
            Action::Continuous(a) if a.len() == 3 => UavAction {
                roll: a[0],
                yaw: a[1],
                pitch: a[2],
            },
            other => return Err(Error::shape("3-d continuous action", format!("{other:?}"))),
        };
        let (next, reward, done) = uav_step(&self.world, a);
        let terminal = next.arrived();
        self.world = next;
        Ok(Step {
            observation: uav_observe(&self.world)?.to_vec(),
            reward,
            terminal,
            truncated: done && !terminal,
        })
    }

    fn is_terminal(&self, observation: &[f64]) -> bool {
        norm([observation[3], observation[4], observation[5]]) < self.params.d_com
    }
}
