use super::TabularEnv;

pub const CLIFF_ROWS: usize = 4;
pub const CLIFF_COLS: usize = 12;
const START: GridState = GridState { row: 3, col: 0 };
const GOAL: GridState = GridState { row: 3, col: 11 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridState {
    pub row: usize,
    pub col: usize,
}

impl GridState {
    pub fn index(self) -> usize {
        self.row * CLIFF_COLS + self.col
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            row: i / CLIFF_COLS,
            col: i % CLIFF_COLS,
        }
    }

    pub fn is_cliff(self) -> bool {
        self.row == 3 && (1..=10).contains(&self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Up = 0,
    Right = 1,
    Down = 2,
    Left = 3,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Right, Move::Down, Move::Left];
}

/// One move on the 4x12 cliff grid. Walls clamp; the cliff costs -100 and
/// sends the walker back to the start without ending the episode.
pub fn cliff_step(s: GridState, a: Move) -> (GridState, f64, bool) {
    let (row, col) = match a {
        Move::Up => (s.row.saturating_sub(1), s.col),
        Move::Down => ((s.row + 1).min(CLIFF_ROWS - 1), s.col),
        Move::Left => (s.row, s.col.saturating_sub(1)),
        Move::Right => (s.row, (s.col + 1).min(CLIFF_COLS - 1)),
    };
    let next = GridState { row, col };
    if next.is_cliff() {
        (START, -100.0, false)
    } else {
        (next, -1.0, next == GOAL)
    }
}

#[derive(Debug, Clone)]
pub struct CliffWalking {
    position: GridState,
}

impl CliffWalking {
    pub fn new() -> Self {
        Self { position: START }
    }

    pub fn start() -> GridState {
        START
    }

    pub fn goal() -> GridState {
        GOAL
    }
}

impl Default for CliffWalking {
    fn default() -> Self {
        Self::new()
    }
}

impl TabularEnv for CliffWalking {
    fn num_states(&self) -> usize {
        CLIFF_ROWS * CLIFF_COLS
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn reset(&mut self) -> usize {
        self.position = START;
        START.index()
    }

    fn step(&mut self, action: usize) -> (usize, f64, bool) {
        let (next, r, done) = cliff_step(self.position, Move::ALL[action]);
        self.position = next;
        (next.index(), r, done)
    }
}
