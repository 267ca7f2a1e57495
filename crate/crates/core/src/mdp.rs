//! Experience primitives shared by every agent: transitions, discounting and
//! the uniform replay buffer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind and dimensionality of a state or action value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// A discrete index.
    Index,
    /// A real vector of the given length.
    Vector(usize),
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::Index => write!(f, "discrete index"),
            Shape::Vector(n) => write!(f, "vector of length {n}"),
        }
    }
}

pub trait Shaped {
    fn shape(&self) -> Shape;
}

impl Shaped for usize {
    fn shape(&self) -> Shape {
        Shape::Index
    }
}

impl Shaped for Vec<f64> {
    fn shape(&self) -> Shape {
        Shape::Vector(self.len())
    }
}

/// One interaction tuple `(s, a, r, s', done)`.
///
/// `done` marks a true termination: targets built from this transition do not
/// bootstrap past it. Time-limit truncation is not a termination.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S, A> {
    pub state: S,
    pub action: A,
    pub reward: f64,
    pub next_state: S,
    pub done: bool,
}

impl<S: Shaped, A> Transition<S, A> {
    pub fn new(state: S, action: A, reward: f64, next_state: S, done: bool) -> Result<Self> {
        if state.shape() != next_state.shape() {
            return Err(Error::shape(state.shape(), next_state.shape()));
        }
        if !reward.is_finite() {
            return Err(Error::NonFinite {
                context: "transition reward".into(),
            });
        }
        Ok(Self {
            state,
            action,
            reward,
            next_state,
            done,
        })
    }
}

/// Discount factor, `0 <= gamma < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Discount(f64);

impl Discount {
    pub fn new(gamma: f64) -> Result<Self> {
        if (0.0..1.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(Error::Domain(format!("discount must lie in [0, 1), got {gamma}")))
        }
    }

    pub fn gamma(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Discount {
    type Error = Error;

    fn try_from(gamma: f64) -> Result<Self> {
        Self::new(gamma)
    }
}

impl From<Discount> for f64 {
    fn from(d: Discount) -> f64 {
        d.0
    }
}

/// `sum_t gamma^t r_t`, starting at `t = 0`.
pub fn discounted_return(rewards: &[f64], discount: Discount) -> f64 {
    let gamma = discount.gamma();
    let mut weight = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    total
}

/// Bounded ring store of transitions with uniform sampling (with replacement).
#[derive(Debug, Clone)]
pub struct ReplayBuffer<S, A> {
    capacity: usize,
    entries: Vec<Transition<S, A>>,
    cursor: usize,
}

impl<S: Shaped, A: Shaped> ReplayBuffer<S, A> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay buffer capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            entries: Vec::new(),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores `t`, overwriting the oldest entry once the buffer is full.
    pub fn push(&mut self, t: Transition<S, A>) -> Result<()> {
        if let Some(first) = self.entries.first() {
            if first.state.shape() != t.state.shape() {
                return Err(Error::shape(first.state.shape(), t.state.shape()));
            }
            if first.action.shape() != t.action.shape() {
                return Err(Error::shape(first.action.shape(), t.action.shape()));
            }
        }
        if t.state.shape() != t.next_state.shape() {
            return Err(Error::shape(t.state.shape(), t.next_state.shape()));
        }
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Draws `batch_size` entries uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<&Transition<S, A>>> {
        if batch_size == 0 || batch_size > self.entries.len() {
            return Err(Error::InsufficientSamples {
                requested: batch_size,
                available: self.entries.len(),
            });
        }
        Ok((0..batch_size)
            .map(|_| &self.entries[rng.random_range(0..self.entries.len())])
            .collect())
    }

    /// Entries from oldest to newest.
    pub fn iter_chronological(&self) -> impl Iterator<Item = &Transition<S, A>> {
        let split = if self.entries.len() < self.capacity {
            0
        } else {
            self.cursor
        };
        self.entries[split..].iter().chain(self.entries[..split].iter())
    }
}
