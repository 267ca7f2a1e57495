use super::TabularEnv;

/// Deterministic corridor: states `0..len`, action 0 moves right, action 1
/// moves left (clamped at 0). Leaving the last state to the right pays +1
/// and terminates; every other move pays 0.
#[derive(Debug, Clone)]
pub struct Chain {
    len: usize,
    position: usize,
}

impl Chain {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1);
        Self { len, position: 0 }
    }

    /// Pure transition function; the terminal state index is `len`.
    pub fn transition(&self, s: usize, a: usize) -> (usize, f64, bool) {
        match a {
            0 if s + 1 == self.len => (self.len, 1.0, true),
            0 => (s + 1, 0.0, false),
            _ => (s.saturating_sub(1), 0.0, false),
        }
    }
}

impl TabularEnv for Chain {
    fn num_states(&self) -> usize {
        self.len + 1
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn reset(&mut self) -> usize {
        self.position = 0;
        0
    }

    fn step(&mut self, action: usize) -> (usize, f64, bool) {
        let out = self.transition(self.position, action);
        self.position = out.0;
        out
    }
}
