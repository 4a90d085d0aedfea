//! Classical Turing machines on a two-way infinite binary tape.
//!
//! Machines have `n` ordinary states numbered from 0 (the start state) plus
//! one distinguished `Halt` target that is not counted in `n`. A transition
//! fires on `(state, read bit)` and always writes, moves one cell, and names
//! a successor; a transition into `Halt` still performs its write and move,
//! and that step is counted. Text formats name states `A` through `Z`.

use std::fmt;

/// Head movement. One cell per step; the tape is two-way infinite, so both
/// directions are always available.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Dir {
    L,
    R,
}

impl Dir {
    pub fn delta(self) -> i64 {
        match self {
            Dir::L => -1,
            Dir::R => 1,
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::L => Dir::R,
            Dir::R => Dir::L,
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::L => "L",
            Dir::R => "R",
        })
    }
}

/// Successor of a transition: another ordinary state or the halt target.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ClassicalTarget {
    State(u8),
    Halt,
}

/// One table entry: write `write`, move `dir`, continue as `next`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClassicalAction {
    pub write: u8,
    pub dir: Dir,
    pub next: ClassicalTarget,
}

/// A total transition table over `(state, bit)`. Row `s` holds the actions
/// for reading 0 and 1 in state `s`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ClassicalMachine {
    rows: Vec<[ClassicalAction; 2]>,
}

pub const MAX_NAMED_STATES: usize = 26;

impl ClassicalMachine {
    /// Panics if the table is empty, exceeds the `A`..`Z` naming range, or
    /// references a state outside the table.
    pub fn new(rows: Vec<[ClassicalAction; 2]>) -> Self {
        assert!(!rows.is_empty(), "a machine needs at least one state");
        assert!(rows.len() <= MAX_NAMED_STATES, "at most {MAX_NAMED_STATES} states");
        let n = rows.len() as u8;
        for row in &rows {
            for action in row {
                assert!(action.write <= 1, "writes must be bits");
                if let ClassicalTarget::State(s) = action.next {
                    assert!(s < n, "transition target {s} out of range");
                }
            }
        }
        ClassicalMachine { rows }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn action(&self, state: u8, bit: u8) -> ClassicalAction {
        self.rows[state as usize][bit as usize]
    }

    pub fn rows(&self) -> &[[ClassicalAction; 2]] {
        &self.rows
    }

    /// True if some entry transitions into `Halt`.
    pub fn has_halt_entry(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .any(|a| a.next == ClassicalTarget::Halt)
    }

    /// The same machine with every L and R exchanged. Running the mirror
    /// from blank produces the mirror image of the original run.
    pub fn mirrored(&self) -> ClassicalMachine {
        let rows = self
            .rows
            .iter()
            .map(|row| row.map(|a| ClassicalAction { dir: a.dir.flip(), ..a }))
            .collect();
        ClassicalMachine { rows }
    }

    /// Compact one-line encoding, e.g. `1RB1LB_1LA1RH`: one 3-character
    /// action per read bit, states `_`-separated, `H` for the halt target.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push('_');
            }
            for action in row {
                out.push(if action.write == 1 { '1' } else { '0' });
                out.push(match action.dir {
                    Dir::L => 'L',
                    Dir::R => 'R',
                });
                out.push(match action.next {
                    ClassicalTarget::State(s) => (b'A' + s) as char,
                    ClassicalTarget::Halt => 'H',
                });
            }
        }
        out
    }
}

/// Why a compact machine encoding failed to parse.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EncodingError {
    #[error("empty encoding")]
    Empty,
    #[error("state {0} has {1} characters, expected 6 (two 3-character actions)")]
    BadRowLength(char, usize),
    #[error("bad write symbol {0:?}, expected '0' or '1'")]
    BadWrite(char),
    #[error("bad direction {0:?}, expected 'L' or 'R'")]
    BadDir(char),
    #[error("bad target {0:?}, expected 'A'..'Z' or 'H'")]
    BadTarget(char),
    #[error("transition targets state {target} but the table has {n} states")]
    TargetOutOfRange { target: char, n: usize },
    #[error("more than {MAX_NAMED_STATES} states")]
    TooManyStates,
}

impl std::str::FromStr for ClassicalMachine {
    type Err = EncodingError;

    /// Parses the compact encoding produced by [`ClassicalMachine::encode`].
    fn from_str(s: &str) -> Result<Self, EncodingError> {
        if s.is_empty() {
            return Err(EncodingError::Empty);
        }
        let mut rows = Vec::new();
        for (i, chunk) in s.split('_').enumerate() {
            let state_name = (b'A' + (i as u8).min(25)) as char;
            let chars: Vec<char> = chunk.chars().collect();
            if chars.len() != 6 {
                return Err(EncodingError::BadRowLength(state_name, chars.len()));
            }
            let mut row = Vec::with_capacity(2);
            for action in chars.chunks(3) {
                let write = match action[0] {
                    '0' => 0,
                    '1' => 1,
                    c => return Err(EncodingError::BadWrite(c)),
                };
                let dir = match action[1] {
                    'L' => Dir::L,
                    'R' => Dir::R,
                    c => return Err(EncodingError::BadDir(c)),
                };
                let next = match action[2] {
                    'H' => ClassicalTarget::Halt,
                    c @ 'A'..='Z' => ClassicalTarget::State(c as u8 - b'A'),
                    c => return Err(EncodingError::BadTarget(c)),
                };
                row.push(ClassicalAction { write, dir, next });
            }
            rows.push([row[0], row[1]]);
        }
        if rows.len() > MAX_NAMED_STATES {
            return Err(EncodingError::TooManyStates);
        }
        let n = rows.len();
        for row in &rows {
            for action in row {
                if let ClassicalTarget::State(s) = action.next {
                    if s as usize >= n {
                        return Err(EncodingError::TargetOutOfRange {
                            target: (b'A' + s) as char,
                            n,
                        });
                    }
                }
            }
        }
        Ok(ClassicalMachine { rows })
    }
}

/// The finite portion of a two-way infinite tape that a run has touched.
/// Cells outside the window read as 0. The window covers exactly the cells
/// ever written or visited, so scoring and cleanliness checks need only
/// look inside it. (The backing buffer over-allocates for amortized growth;
/// the visited extent is tracked separately and padding never leaks into
/// bounds, equality, or the clean check.)
#[derive(Clone, Debug)]
pub struct FiniteTapeWindow {
    cells: Vec<u8>,
    origin: i64,
    lo: i64,
    hi: i64,
}

impl FiniteTapeWindow {
    /// A window holding just the (blank) start cell 0.
    pub fn blank() -> Self {
        FiniteTapeWindow { cells: vec![0], origin: 0, lo: 0, hi: 0 }
    }

    pub fn get(&self, pos: i64) -> u8 {
        if pos < self.origin {
            return 0;
        }
        let idx = (pos - self.origin) as usize;
        self.cells.get(idx).copied().unwrap_or(0)
    }

    /// Grows the visited window (with zeros) until it contains `pos`.
    pub fn ensure(&mut self, pos: i64) {
        if pos < self.origin {
            let deficit = (self.origin - pos) as usize;
            let grow = deficit.max(self.cells.len()).max(16);
            let mut cells = vec![0; grow + self.cells.len()];
            cells[grow..].copy_from_slice(&self.cells);
            self.cells = cells;
            self.origin -= grow as i64;
        } else {
            let idx = (pos - self.origin) as usize;
            if idx >= self.cells.len() {
                let target = (idx + 1).max(self.cells.len() * 2).max(16);
                self.cells.resize(target, 0);
            }
        }
        self.lo = self.lo.min(pos);
        self.hi = self.hi.max(pos);
    }

    pub fn set(&mut self, pos: i64, bit: u8) {
        assert!(bit <= 1, "tape symbols must be bits");
        self.ensure(pos);
        self.cells[(pos - self.origin) as usize] = bit;
    }

    /// Leftmost and rightmost visited positions, inclusive.
    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    /// The visited cells, leftmost first.
    pub fn visited_cells(&self) -> &[u8] {
        let start = (self.lo - self.origin) as usize;
        let end = (self.hi - self.origin) as usize;
        &self.cells[start..=end]
    }

    /// Absolute position of the first 1 and the window content from the
    /// first through the last 1. All-zero windows give `(0, &[])`.
    pub fn trimmed(&self) -> (i64, &[u8]) {
        let visited = self.visited_cells();
        let Some(first) = visited.iter().position(|&b| b == 1) else {
            return (0, &[]);
        };
        let last = visited.iter().rposition(|&b| b == 1).unwrap();
        (self.lo + first as i64, &visited[first..=last])
    }
}

impl PartialEq for FiniteTapeWindow {
    fn eq(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.visited_cells() == other.visited_cells()
    }
}

impl Eq for FiniteTapeWindow {}

impl std::hash::Hash for FiniteTapeWindow {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.lo.hash(state);
        self.hi.hash(state);
        self.visited_cells().hash(state);
    }
}

/// Counts the ones left on the tape.
pub fn score_rado(tape: &FiniteTapeWindow) -> u64 {
    tape.visited_cells().iter().map(|&b| b as u64).sum()
}

/// Outcome of the clean-output check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CleanOutcome {
    Clean(u64),
    NotClean,
}

/// `Clean(k)` iff the tape reads `1^k 0^ω` starting at the leftmost window
/// cell. On a two-way tape there is no intrinsic "start of tape", so the
/// check anchors at the leftmost cell the run ever touched; a stray zero
/// there (e.g. window content `0,1,1`) is NotClean. A blank window is
/// `Clean(0)`.
pub fn is_clean_output(tape: &FiniteTapeWindow) -> CleanOutcome {
    let visited = tape.visited_cells();
    let ones = visited.iter().take_while(|&&b| b == 1).count();
    if visited[ones..].iter().all(|&b| b == 0) {
        CleanOutcome::Clean(ones as u64)
    } else {
        CleanOutcome::NotClean
    }
}

/// A mid-run configuration: tape window, head position, current state.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ClassicalConfig {
    pub tape: FiniteTapeWindow,
    pub head: i64,
    pub state: u8,
}

impl ClassicalConfig {
    pub fn blank() -> Self {
        ClassicalConfig { tape: FiniteTapeWindow::blank(), head: 0, state: 0 }
    }
}

/// Result of one step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClassicalStep {
    Continue(ClassicalConfig),
    /// The step transitioned into `Halt`; its write and move were applied.
    Halted(FiniteTapeWindow),
}

/// Applies one transition to `config`.
pub fn step_classical(m: &ClassicalMachine, config: &ClassicalConfig) -> ClassicalStep {
    let mut next = config.clone();
    step_classical_mut(m, &mut next)
        .map(ClassicalStep::Halted)
        .unwrap_or(ClassicalStep::Continue(next))
}

/// In-place step; returns the final tape when the transition halts.
pub(crate) fn step_classical_mut(
    m: &ClassicalMachine,
    config: &mut ClassicalConfig,
) -> Option<FiniteTapeWindow> {
    let bit = config.tape.get(config.head);
    let action = m.action(config.state, bit);
    config.tape.set(config.head, action.write);
    config.head += action.dir.delta();
    config.tape.ensure(config.head);
    match action.next {
        ClassicalTarget::State(s) => {
            config.state = s;
            None
        }
        ClassicalTarget::Halt => Some(std::mem::replace(&mut config.tape, FiniteTapeWindow::blank())),
    }
}

/// Result of a budgeted run from the blank configuration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClassicalRun {
    Halted { steps: u64, tape: FiniteTapeWindow },
    OutOfBudget { last: ClassicalConfig },
}

/// Runs `m` from blank for at most `budget` steps.
pub fn run_classical(m: &ClassicalMachine, budget: u64) -> ClassicalRun {
    let mut config = ClassicalConfig::blank();
    for step in 1..=budget {
        if let Some(tape) = step_classical_mut(m, &mut config) {
            return ClassicalRun::Halted { steps: step, tape };
        }
    }
    ClassicalRun::OutOfBudget { last: config }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(write: u8, dir: Dir, next: ClassicalTarget) -> ClassicalAction {
        ClassicalAction { write, dir, next }
    }

    #[test]
    fn one_writer_halts_after_one_step_with_one_one() {
        let m = ClassicalMachine::new(vec![[
            act(1, Dir::R, ClassicalTarget::Halt),
            act(1, Dir::R, ClassicalTarget::Halt),
        ]]);
        match run_classical(&m, 10) {
            ClassicalRun::Halted { steps, tape } => {
                assert_eq!(steps, 1);
                assert_eq!(score_rado(&tape), 1);
                assert_eq!(is_clean_output(&tape), CleanOutcome::Clean(1));
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn left_move_from_cell_zero_reaches_cell_minus_one() {
        let m = ClassicalMachine::new(vec![[
            act(1, Dir::L, ClassicalTarget::State(0)),
            act(1, Dir::L, ClassicalTarget::State(0)),
        ]]);
        let ClassicalStep::Continue(config) = step_classical(&m, &ClassicalConfig::blank()) else {
            panic!("machine does not halt in one step");
        };
        assert_eq!(config.head, -1);
        assert_eq!(config.tape.get(0), 1);
        assert_eq!(config.tape.get(-1), 0);
    }

    #[test]
    fn zero_writing_right_runner_exhausts_budget() {
        let m = ClassicalMachine::new(vec![[
            act(0, Dir::R, ClassicalTarget::State(0)),
            act(0, Dir::R, ClassicalTarget::State(0)),
        ]]);
        match run_classical(&m, 100) {
            ClassicalRun::OutOfBudget { last } => assert_eq!(last.head, 100),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn clean_check_anchors_at_leftmost_window_cell() {
        let mut ones = FiniteTapeWindow::blank();
        for (i, b) in [1, 1, 1, 0, 0].into_iter().enumerate() {
            ones.set(i as i64, b);
        }
        assert_eq!(is_clean_output(&ones), CleanOutcome::Clean(3));

        let mut gap = FiniteTapeWindow::blank();
        for (i, b) in [1, 0, 1].into_iter().enumerate() {
            gap.set(i as i64, b);
        }
        assert_eq!(is_clean_output(&gap), CleanOutcome::NotClean);

        assert_eq!(is_clean_output(&FiniteTapeWindow::blank()), CleanOutcome::Clean(0));

        // A zero at the left edge of the visited window spoils cleanliness.
        let mut shifted = FiniteTapeWindow::blank();
        shifted.set(1, 1);
        shifted.set(2, 1);
        assert_eq!(is_clean_output(&shifted), CleanOutcome::NotClean);
    }

    #[test]
    fn two_state_champion_scores_four_in_six_steps() {
        // Found again by the exhaustive 2-state search; pinned here from a
        // hand trace: heads 0,1,0,-1,-2,-1 then halt at 0.
        let m = ClassicalMachine::new(vec![
            [act(1, Dir::R, ClassicalTarget::State(1)), act(1, Dir::L, ClassicalTarget::State(1))],
            [act(1, Dir::L, ClassicalTarget::State(0)), act(1, Dir::R, ClassicalTarget::Halt)],
        ]);
        match run_classical(&m, 10_000) {
            ClassicalRun::Halted { steps, tape } => {
                assert_eq!(steps, 6);
                assert_eq!(score_rado(&tape), 4);
                let (start, content) = tape.trimmed();
                assert_eq!(start, -2);
                assert_eq!(content, &[1, 1, 1, 1]);
                assert_eq!(is_clean_output(&tape), CleanOutcome::Clean(4));
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn encoding_is_stable() {
        let m = ClassicalMachine::new(vec![
            [act(1, Dir::R, ClassicalTarget::State(1)), act(1, Dir::L, ClassicalTarget::State(1))],
            [act(1, Dir::L, ClassicalTarget::State(0)), act(1, Dir::R, ClassicalTarget::Halt)],
        ]);
        assert_eq!(m.encode(), "1RB1LB_1LA1RH");
        assert_eq!(m.mirrored().encode(), "1LB1RB_1RA1LH");
    }

    #[test]
    fn encoding_round_trips() {
        for enc in ["1RB1LB_1LA1RH", "1RH1RH", "0LA0RA", "1RB1LA_1LC1RB_1RH1LA"] {
            let m: ClassicalMachine = enc.parse().expect("valid encoding");
            assert_eq!(m.encode(), enc);
        }
    }

    #[test]
    fn decode_rejects_malformed_encodings() {
        assert_eq!("".parse::<ClassicalMachine>(), Err(EncodingError::Empty));
        assert_eq!(
            "1RB1L_1LA1RH".parse::<ClassicalMachine>(),
            Err(EncodingError::BadRowLength('A', 5))
        );
        assert_eq!("2RA0LA".parse::<ClassicalMachine>(), Err(EncodingError::BadWrite('2')));
        assert_eq!("1XA0LA".parse::<ClassicalMachine>(), Err(EncodingError::BadDir('X')));
        assert_eq!("1R?0LA".parse::<ClassicalMachine>(), Err(EncodingError::BadTarget('?')));
        assert_eq!(
            "1RB0LA".parse::<ClassicalMachine>(),
            Err(EncodingError::TargetOutOfRange { target: 'B', n: 1 })
        );
    }
}
