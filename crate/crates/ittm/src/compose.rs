//! Machine composition: building a three-tape machine that computes
//! `g(g(x))` out of a one-tape machine for `g`, with exact state
//! accounting.
//!
//! The composed machine starts on blank tapes and runs six phases: write
//! the unary numeral for `x` on the input tape, run `m` in place there,
//! copy the result to the scratch tape, run `m` again there, and copy the
//! final numeral to the output tape, halting with a clean unary output.
//! Between phases the head must return to cell 0, which a one-way tape
//! makes awkward: marching left by content deadlocks at cell 0 (a left
//! move there stays put, rereading the same cell forever). The fix is a
//! cross-tape marker: a 1 planted at cell 0 of a tape the current phase
//! otherwise leaves alone, which the rewind state scans for. Runs of `m`
//! embedded on one tape write the other two tapes back unchanged, so
//! markers survive them.
//!
//! The state count is exact: `x` writer states (none when `x = 0`) plus
//! the same fixed overhead `h(C) = 2C + 9` for every `x`, where `C` is
//! the state count of `m`. That constant-overhead shape is the point of
//! the construction, and [`compose_theorem1`] reports and asserts it.

use std::fmt;

use crate::classical::Dir;
use crate::ittm::{
    all_triples, triple_index, ITTMachine, IttmAction, IttmTarget, RowId, TapeId, Triple,
};
use crate::tape::EPTape;

/// Where a fragment transition goes: an internal state or the splice
/// point that the next fragment (or `Halt`) will occupy.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FragTarget {
    State(usize),
    Exit,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FragAction {
    pub write: Triple,
    pub dir: Dir,
    pub next: FragTarget,
}

/// An open machine piece: a total table over its own states whose `Exit`
/// transitions are left dangling for a later splice. Splicing never adds
/// or removes states, so state counts add exactly.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MachineFragment {
    rows: Vec<[FragAction; 8]>,
    entry: usize,
}

impl MachineFragment {
    /// Panics if the table is empty or a target is out of range.
    pub fn new(rows: Vec<[FragAction; 8]>, entry: usize) -> Self {
        assert!(!rows.is_empty(), "a fragment needs at least one state");
        assert!(entry < rows.len(), "entry state out of range");
        for action in rows.iter().flatten() {
            if let FragTarget::State(s) = action.next {
                assert!(s < rows.len(), "fragment target out of range");
            }
        }
        MachineFragment { rows, entry }
    }

    /// Builds a single-state fragment from a function over read triples.
    pub fn single(f: impl Fn(Triple) -> FragAction) -> Self {
        MachineFragment::new(vec![std::array::from_fn(|i| f(crate::ittm::triple_from_index(i)))], 0)
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self) -> usize {
        self.entry
    }

    pub fn rows(&self) -> &[[FragAction; 8]] {
        &self.rows
    }

    /// Splices `next` after `self`: every `Exit` of `self` is rewired to
    /// `next`'s entry, every `Exit` of `next` stays an `Exit`. The result
    /// has exactly the sum of the two state counts.
    pub fn then(mut self, next: MachineFragment) -> MachineFragment {
        let offset = self.rows.len();
        for action in self.rows.iter_mut().flatten() {
            if action.next == FragTarget::Exit {
                action.next = FragTarget::State(offset + next.entry);
            }
        }
        self.rows.extend(next.rows.into_iter().map(|row| {
            row.map(|mut action| {
                if let FragTarget::State(s) = action.next {
                    action.next = FragTarget::State(s + offset);
                }
                action
            })
        }));
        self
    }

    /// Closes the fragment into a full machine: the entry becomes state 0,
    /// `Exit` becomes `Halt`, and one extra trailing state is appended
    /// that drifts right forever; the limit row sends every read there, so
    /// the table is total. A run that never leaves the fragment's
    /// successor stages never sees that state.
    pub fn into_machine(self) -> ITTMachine {
        let n = self.rows.len();
        // The entry must be state 0 of the machine; rotate indices so the
        // entry maps to 0 and everything below it shifts up by one.
        let remap = |s: usize| -> u16 {
            use std::cmp::Ordering;
            (match s.cmp(&self.entry) {
                Ordering::Equal => 0,
                Ordering::Greater => s,
                Ordering::Less => s + 1,
            }) as u16
        };
        let dead = n as u16;
        let mut rows = vec![[IttmAction { write: [0; 3], dir: Dir::R, next: IttmTarget::Halt }; 8]; n + 1];
        for (s, row) in self.rows.iter().enumerate() {
            for (i, action) in row.iter().enumerate() {
                rows[remap(s) as usize][i] = IttmAction {
                    write: action.write,
                    dir: action.dir,
                    next: match action.next {
                        FragTarget::State(t) => IttmTarget::State(remap(t)),
                        FragTarget::Exit => IttmTarget::Halt,
                    },
                };
            }
        }
        for (i, t) in all_triples().enumerate() {
            rows[dead as usize][i] =
                IttmAction { write: t, dir: Dir::R, next: IttmTarget::State(dead) };
        }
        let limit_row = std::array::from_fn(|i| IttmAction {
            write: crate::ittm::triple_from_index(i),
            dir: Dir::R,
            next: IttmTarget::State(dead),
        });
        ITTMachine::new(rows, limit_row)
    }
}

/// Tapes and head after a fragment run reached `Exit`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FragmentRun {
    pub tapes: [EPTape; 3],
    pub head: usize,
    pub steps: u64,
}

/// Interprets a fragment from its entry until it exits. Returns `None` if
/// it does not exit within `max_steps`.
pub fn run_fragment(
    frag: &MachineFragment,
    mut tapes: [EPTape; 3],
    mut head: usize,
    max_steps: u64,
) -> Option<FragmentRun> {
    let mut state = frag.entry;
    let mut steps = 0;
    loop {
        if steps >= max_steps {
            return None;
        }
        let read: Triple = [tapes[0].get(head), tapes[1].get(head), tapes[2].get(head)];
        let action = frag.rows[state][triple_index(read)];
        for (tape, &bit) in tapes.iter_mut().zip(action.write.iter()) {
            tape.set(head, bit);
        }
        head = match action.dir {
            Dir::L => head.saturating_sub(1),
            Dir::R => head + 1,
        };
        steps += 1;
        match action.next {
            FragTarget::State(s) => state = s,
            FragTarget::Exit => return Some(FragmentRun { tapes, head, steps }),
        }
    }
}

/// A machine that reads and writes only one designated tape: per state
/// just two actions, one per bit under the head on that tape.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct OneTapeAction {
    pub write: u8,
    pub dir: Dir,
    pub next: IttmTarget,
}

/// The compact table of a one-tape machine, tape-agnostic: the same table
/// can be embedded on the input tape in one phase and the scratch tape in
/// another. The limit row makes it a complete machine of its own when
/// expanded with [`OneTapeITTM::to_ittm`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OneTapeITTM {
    rows: Vec<[OneTapeAction; 2]>,
    limit_row: [OneTapeAction; 2],
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum NotOneTapeError {
    #[error("row {row} behaves differently on triples that agree on the {tape} tape")]
    DependsOnOtherTapes { row: String, tape: TapeId },
    #[error("row {row} writes to a tape other than {tape}")]
    WritesOtherTapes { row: String, tape: TapeId },
}

impl OneTapeITTM {
    /// Panics if the table is empty, writes a non-bit, or targets a state
    /// out of range.
    pub fn new(rows: Vec<[OneTapeAction; 2]>, limit_row: [OneTapeAction; 2]) -> Self {
        assert!(!rows.is_empty(), "a machine needs at least one state");
        let n = rows.len() as u16;
        for action in rows.iter().flatten().chain(limit_row.iter()) {
            assert!(action.write <= 1, "writes must be bits");
            if let IttmTarget::State(s) = action.next {
                assert!(s < n, "target S{s} out of range");
            }
        }
        OneTapeITTM { rows, limit_row }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn action(&self, row: RowId, bit: u8) -> OneTapeAction {
        match row {
            RowId::State(s) => self.rows[s as usize][bit as usize],
            RowId::Limit => self.limit_row[bit as usize],
        }
    }

    /// Expands the compact table to a full three-tape machine acting on
    /// `tape`, writing the other two components of every triple back
    /// unchanged.
    pub fn to_ittm(&self, tape: TapeId) -> ITTMachine {
        let expand = |a: OneTapeAction, t: Triple| {
            let mut write = t;
            write[tape.index()] = a.write;
            IttmAction { write, dir: a.dir, next: a.next }
        };
        ITTMachine::from_fn(self.rows.len() as u16, |row, t| {
            expand(self.action(row, t[tape.index()]), t)
        })
    }

    /// Checks syntactically that `m` touches only `tape`: any two triples
    /// agreeing on that tape's bit must get identical treatment, and the
    /// other two components must be written back unchanged. On success the
    /// compact table is recovered.
    pub fn from_ittm(m: &ITTMachine, tape: TapeId) -> Result<OneTapeITTM, NotOneTapeError> {
        let d = tape.index();
        let all_rows = (0..m.n_states() as u16)
            .map(RowId::State)
            .chain(std::iter::once(RowId::Limit));
        let mut compact_rows = Vec::with_capacity(m.n_states());
        let mut compact_limit = None;
        for row in all_rows {
            let mut per_bit: [Option<OneTapeAction>; 2] = [None, None];
            for t in all_triples() {
                let action = m.action(row, t);
                for j in 0..3 {
                    if j != d && action.write[j] != t[j] {
                        return Err(NotOneTapeError::WritesOtherTapes {
                            row: row.to_string(),
                            tape,
                        });
                    }
                }
                let compact = OneTapeAction {
                    write: action.write[d],
                    dir: action.dir,
                    next: action.next,
                };
                match &per_bit[t[d] as usize] {
                    None => per_bit[t[d] as usize] = Some(compact),
                    Some(seen) if *seen == compact => {}
                    Some(_) => {
                        return Err(NotOneTapeError::DependsOnOtherTapes {
                            row: row.to_string(),
                            tape,
                        })
                    }
                }
            }
            let pair = [per_bit[0].expect("filled above"), per_bit[1].expect("filled above")];
            match row {
                RowId::Limit => compact_limit = Some(pair),
                RowId::State(_) => compact_rows.push(pair),
            }
        }
        Ok(OneTapeITTM::new(compact_rows, compact_limit.expect("limit row visited")))
    }

    /// Tries all three tapes in order and returns the first restriction
    /// that validates.
    pub fn detect(m: &ITTMachine) -> Result<(OneTapeITTM, TapeId), NotOneTapeError> {
        let mut last_err = None;
        for tape in crate::ittm::TAPES {
            match OneTapeITTM::from_ittm(m, tape) {
                Ok(ot) => return Ok((ot, tape)),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("three tapes were tried"))
    }

    /// Runs the compact table directly on a single tape from head 0 at
    /// successor stages only. Returns the tape after halting, or `None`
    /// if the budget runs out. This is the independent oracle that
    /// embedding and composition are tested against.
    pub fn run_alone(&self, mut tape: EPTape, max_steps: u64) -> Option<EPTape> {
        let mut head: usize = 0;
        let mut state: u16 = 0;
        for _ in 0..max_steps {
            let a = self.rows[state as usize][tape.get(head) as usize];
            tape.set(head, a.write);
            head = match a.dir {
                Dir::L => head.saturating_sub(1),
                Dir::R => head + 1,
            };
            match a.next {
                IttmTarget::State(s) => state = s,
                IttmTarget::Halt => return Some(tape),
            }
        }
        None
    }
}

/// Writes `x` ones to cells `0..x` of the input tape, entering at head 0
/// and exiting at head `x`: one state per written 1, so exactly `x`
/// states for `x ≥ 1`. For `x = 0` the fragment is a single state that
/// writes nothing and stays at cell 0 (a left move at the edge).
pub fn write_ones_gadget(x: u64) -> MachineFragment {
    if x == 0 {
        return MachineFragment::single(|t| FragAction {
            write: t,
            dir: Dir::L,
            next: FragTarget::Exit,
        });
    }
    let n = x as usize;
    let rows = (0..n)
        .map(|i| {
            std::array::from_fn(|k| {
                let t = crate::ittm::triple_from_index(k);
                FragAction {
                    write: [1, t[1], t[2]],
                    dir: Dir::R,
                    next: if i + 1 < n { FragTarget::State(i + 1) } else { FragTarget::Exit },
                }
            })
        })
        .collect();
    MachineFragment::new(rows, 0)
}

/// Embeds a one-tape machine so it acts on `tape`, leaving the other two
/// tapes bitwise unchanged at every step: exactly `C` fragment states for
/// a `C`-state machine, with `Halt` turned into `Exit`.
pub fn embed_on_tape(m: &OneTapeITTM, tape: TapeId) -> MachineFragment {
    let d = tape.index();
    let rows = (0..m.n_states())
        .map(|s| {
            std::array::from_fn(|k| {
                let t = crate::ittm::triple_from_index(k);
                let a = m.action(RowId::State(s as u16), t[d]);
                let mut write = t;
                write[d] = a.write;
                FragAction {
                    write,
                    dir: a.dir,
                    next: match a.next {
                        IttmTarget::State(s2) => FragTarget::State(s2 as usize),
                        IttmTarget::Halt => FragTarget::Exit,
                    },
                }
            })
        })
        .collect();
    MachineFragment::new(rows, 0)
}

/// Copies a clean unary numeral from `src` to `dst` in one rightward
/// scan: while the `src` bit is 1 it is mirrored to `dst`; at the first 0
/// the fragment writes a terminating 0 to `dst` and exits. One state,
/// independent of the numeral's size. If `src` is not clean unary the
/// scan never meets a 0 and the fragment never exits; callers only feed
/// it unary tapes.
pub fn copy_gadget(src: TapeId, dst: TapeId) -> MachineFragment {
    assert_ne!(src, dst, "copying a tape onto itself");
    MachineFragment::single(|t| {
        let mut write = t;
        if t[src.index()] == 1 {
            write[dst.index()] = 1;
            FragAction { write, dir: Dir::R, next: FragTarget::State(0) }
        } else {
            write[dst.index()] = 0;
            FragAction { write, dir: Dir::L, next: FragTarget::Exit }
        }
    })
}

/// Writes a 1 at the current cell of `tape` and exits without leaving the
/// cell (the move is L, which stays put at cell 0 where this is used).
pub fn plant_marker(tape: TapeId) -> MachineFragment {
    MachineFragment::single(|t| {
        let mut write = t;
        write[tape.index()] = 1;
        FragAction { write, dir: Dir::L, next: FragTarget::Exit }
    })
}

/// Marches the head left until it reads a 1 on `tape`, then exits staying
/// on that cell; with the marker at cell 0 this is the rewind between
/// phases. When `erase` is set the marker is consumed on the way out.
pub fn rewind_to_marker(tape: TapeId, erase: bool) -> MachineFragment {
    MachineFragment::single(|t| {
        if t[tape.index()] == 0 {
            FragAction { write: t, dir: Dir::L, next: FragTarget::State(0) }
        } else {
            let mut write = t;
            if erase {
                write[tape.index()] = 0;
            }
            FragAction { write, dir: Dir::L, next: FragTarget::Exit }
        }
    })
}

/// A composed machine with its exact state accounting.
#[derive(Clone, Debug)]
pub struct Composition {
    pub machine: ITTMachine,
    /// The planted argument.
    pub x: u64,
    /// States of the embedded one-tape machine.
    pub c: usize,
    /// Fixed overhead: `2C + 9`, independent of `x`.
    pub h: usize,
    /// Total ordinary states: `x + h`.
    pub s: usize,
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={} C={} h(C)={} s(x)={}", self.x, self.c, self.h, self.s)
    }
}

/// Builds the machine that computes `g(g(x))` on blank tapes, where `g`
/// is the function the one-tape machine `m` computes in place on its
/// tape, and reports the state accounting.
///
/// Phases, in splice order: plant a scratch marker at cell 0; write the
/// numeral for `x` on the input tape (skipped entirely for `x = 0`, which
/// is what keeps the overhead constant); rewind to the scratch marker;
/// run `m` on the input tape; rewind again; plant an output marker (the
/// scratch marker is about to be overwritten by data); copy input to
/// scratch; rewind to the output marker; run `m` on the scratch tape;
/// rewind once more, erasing the marker; copy scratch to output and halt.
/// The output tape ends clean, `1^{g(g(x))} 0^ω`.
///
/// The result has exactly `s(x) = x + 2C + 9` ordinary states. If `m`
/// halts on the numerals it is fed at successor stages, the composed run
/// halts at a finite stage; an embedded run that needs limit stages sends
/// the composed machine into its trailing drift state instead, and it
/// never halts.
pub fn compose_theorem1(m: &OneTapeITTM, x: u64) -> Composition {
    let c = m.n_states();
    let mut frag = plant_marker(TapeId::Scratch);
    if x >= 1 {
        frag = frag.then(write_ones_gadget(x));
    }
    let frag = frag
        .then(rewind_to_marker(TapeId::Scratch, false))
        .then(embed_on_tape(m, TapeId::Input))
        .then(rewind_to_marker(TapeId::Scratch, false))
        .then(plant_marker(TapeId::Output))
        .then(copy_gadget(TapeId::Input, TapeId::Scratch))
        .then(rewind_to_marker(TapeId::Output, false))
        .then(embed_on_tape(m, TapeId::Scratch))
        .then(rewind_to_marker(TapeId::Output, true))
        .then(copy_gadget(TapeId::Scratch, TapeId::Output));
    let machine = frag.into_machine();
    let h = 2 * c + 9;
    let s = x as usize + h;
    assert_eq!(machine.n_states(), s, "state accounting must be exact");
    Composition { machine, x, c, h, s }
}

/// The sum `Σ_{i=0}^{x} (f(i) + i)²` for a total oracle `f`. Strictly
/// increasing in `x`, at least `f(x)`, and at least `x²`, whatever the
/// oracle; those properties are what downstream bounds lean on.
pub fn reference_f(fstar: impl Fn(u64) -> u64, x: u64) -> u64 {
    (0..=x)
        .map(|i| {
            let term = fstar(i) + i;
            term * term
        })
        .sum()
}

/// Verdict of a finite-horizon eventual-dominance scan.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DominanceWitness {
    /// `f(n) > g(n)` for every `n` from here to the horizon. Evidence at
    /// a finite horizon, not a proof about all of ℕ.
    WitnessFrom(usize),
    NoneWithinHorizon,
}

/// Finds the least `N` with `f(n) > g(n)` for all `n ∈ [N, horizon)`.
///
/// Panics if either sequence is shorter than the horizon.
pub fn dominance_witness(f_vals: &[u64], g_vals: &[u64], horizon: usize) -> DominanceWitness {
    assert!(f_vals.len() >= horizon && g_vals.len() >= horizon, "sequences shorter than horizon");
    let last_failure = (0..horizon).rev().find(|&n| f_vals[n] <= g_vals[n]);
    match last_failure {
        None => DominanceWitness::WitnessFrom(0),
        Some(n) if n + 1 >= horizon => DominanceWitness::NoneWithinHorizon,
        Some(n) => DominanceWitness::WitnessFrom(n + 1),
    }
}

/// In-place unary successor on one tape: runs to the end of the numeral
/// and extends it by one. One state.
pub fn unary_successor() -> OneTapeITTM {
    OneTapeITTM::new(
        vec![[
            OneTapeAction { write: 1, dir: Dir::R, next: IttmTarget::Halt },
            OneTapeAction { write: 1, dir: Dir::R, next: IttmTarget::State(0) },
        ]],
        [
            OneTapeAction { write: 0, dir: Dir::R, next: IttmTarget::Halt },
            OneTapeAction { write: 1, dir: Dir::R, next: IttmTarget::Halt },
        ],
    )
}

/// In-place unary doubling on one tape, `1^y ↦ 1^{2y}`, seven states.
///
/// A moving hole counts the block: dig the leftmost unprocessed 1 into a
/// 0, march right across the rest of the block and the single-0 gap,
/// append a 1 past the end of the zone beyond the gap, march back, heal
/// the hole, and advance. When the dig state reads the gap itself the
/// block is exhausted: fill the gap, then delete the last 1 of the zone,
/// which cancels the fill and leaves `1^{2y}` exactly.
pub fn unary_doubling() -> OneTapeITTM {
    use IttmTarget::{Halt, State};
    let a = |write: u8, dir: Dir, next: IttmTarget| OneTapeAction { write, dir, next };
    // Indices: 0 = dig, 1 = right over block, 2 = right over zone,
    // 3 = left over zone, 4 = left over block, 5 = final sweep right,
    // 6 = delete last.
    let rows = vec![
        [a(1, Dir::R, State(5)), a(0, Dir::R, State(1))],
        [a(0, Dir::R, State(2)), a(1, Dir::R, State(1))],
        [a(1, Dir::L, State(3)), a(1, Dir::R, State(2))],
        [a(0, Dir::L, State(4)), a(1, Dir::L, State(3))],
        [a(1, Dir::R, State(0)), a(1, Dir::L, State(4))],
        [a(0, Dir::L, State(6)), a(1, Dir::R, State(5))],
        [a(0, Dir::R, Halt), a(0, Dir::R, Halt)],
    ];
    let limit_row = [a(0, Dir::R, Halt), a(1, Dir::R, Halt)];
    OneTapeITTM::new(rows, limit_row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{f_star, ExecBudget, FStarOutcome};
    use crate::ittm::LimitRule;

    fn blank_tapes() -> [EPTape; 3] {
        [EPTape::blank(), EPTape::blank(), EPTape::blank()]
    }

    #[test]
    fn writer_lays_down_exactly_x_ones() {
        let run = run_fragment(&write_ones_gadget(3), blank_tapes(), 0, 100).unwrap();
        assert_eq!(run.tapes[TapeId::Input.index()], EPTape::encode_unary(3));
        assert!(run.tapes[TapeId::Output.index()].is_blank());
        assert_eq!(run.head, 3);
        assert_eq!(run.steps, 3);

        let nothing = run_fragment(&write_ones_gadget(0), blank_tapes(), 0, 100).unwrap();
        assert!(nothing.tapes.iter().all(|t| t.is_blank()));
        assert_eq!(nothing.head, 0);
    }

    #[test]
    fn writer_state_count_tracks_x() {
        assert_eq!(write_ones_gadget(7).n_states() - write_ones_gadget(4).n_states(), 3);
        assert_eq!(write_ones_gadget(0).n_states(), 1);
        assert_eq!(write_ones_gadget(1).n_states(), 1);
    }

    #[test]
    fn successor_behaves_alone_and_embedded() {
        let m = unary_successor();
        for y in 0..6 {
            assert_eq!(
                m.run_alone(EPTape::encode_unary(y), 1_000).unwrap(),
                EPTape::encode_unary(y + 1),
                "alone at y = {y}"
            );
        }
        let mut tapes = blank_tapes();
        tapes[TapeId::Input.index()] = EPTape::encode_unary(3);
        let run = run_fragment(&embed_on_tape(&m, TapeId::Input), tapes, 0, 1_000).unwrap();
        assert_eq!(run.tapes[TapeId::Input.index()], EPTape::encode_unary(4));
        assert!(run.tapes[TapeId::Scratch.index()].is_blank());
    }

    #[test]
    fn doubling_matches_its_oracle() {
        let m = unary_doubling();
        assert_eq!(m.n_states(), 7);
        for y in 0..8 {
            assert_eq!(
                m.run_alone(EPTape::encode_unary(y), 10_000).unwrap(),
                EPTape::encode_unary(2 * y),
                "y = {y}"
            );
        }
    }

    #[test]
    fn embedding_preserves_the_other_tapes() {
        let mut tapes = blank_tapes();
        tapes[TapeId::Input.index()] = EPTape::from_finite(vec![1, 0, 1]);
        tapes[TapeId::Output.index()] = EPTape::encode_unary(2);
        tapes[TapeId::Scratch.index()] = EPTape::encode_unary(3);
        let before_input = tapes[TapeId::Input.index()].clone();
        let before_output = tapes[TapeId::Output.index()].clone();
        let run =
            run_fragment(&embed_on_tape(&unary_doubling(), TapeId::Scratch), tapes, 0, 10_000)
                .unwrap();
        assert_eq!(run.tapes[TapeId::Input.index()], before_input);
        assert_eq!(run.tapes[TapeId::Output.index()], before_output);
        assert_eq!(run.tapes[TapeId::Scratch.index()], EPTape::encode_unary(6));
    }

    #[test]
    fn immediate_halt_embeds_to_immediate_exit() {
        let halt = OneTapeITTM::new(
            vec![[
                OneTapeAction { write: 0, dir: Dir::R, next: IttmTarget::Halt },
                OneTapeAction { write: 1, dir: Dir::R, next: IttmTarget::Halt },
            ]],
            [
                OneTapeAction { write: 0, dir: Dir::R, next: IttmTarget::Halt },
                OneTapeAction { write: 1, dir: Dir::R, next: IttmTarget::Halt },
            ],
        );
        let run = run_fragment(&embed_on_tape(&halt, TapeId::Input), blank_tapes(), 0, 10).unwrap();
        assert_eq!(run.steps, 1);
        assert!(run.tapes.iter().all(|t| t.is_blank()));
    }

    #[test]
    fn copy_mirrors_clean_unary() {
        let mut tapes = blank_tapes();
        tapes[TapeId::Input.index()] = EPTape::encode_unary(5);
        let run =
            run_fragment(&copy_gadget(TapeId::Input, TapeId::Scratch), tapes, 0, 100).unwrap();
        assert_eq!(run.tapes[TapeId::Scratch.index()], EPTape::encode_unary(5));
        assert_eq!(run.tapes[TapeId::Input.index()], EPTape::encode_unary(5));

        let blank_run =
            run_fragment(&copy_gadget(TapeId::Input, TapeId::Scratch), blank_tapes(), 0, 100)
                .unwrap();
        assert!(blank_run.tapes.iter().all(|t| t.is_blank()));
    }

    #[test]
    fn splicing_is_associative_in_effect() {
        let a = plant_marker(TapeId::Scratch);
        let b = write_ones_gadget(2);
        let c = copy_gadget(TapeId::Input, TapeId::Output);
        let left = a.clone().then(b.clone()).then(c.clone());
        let right = a.then(b.then(c));
        assert_eq!(left.n_states(), right.n_states());
        // Step-for-step equality of the observable effect.
        for cap in 1..12 {
            let lr = run_fragment(&left, blank_tapes(), 0, cap);
            let rr = run_fragment(&right, blank_tapes(), 0, cap);
            assert_eq!(lr, rr, "cap = {cap}");
        }
    }

    #[test]
    fn one_tape_restriction_round_trips_and_rejects() {
        let m = unary_doubling();
        let full = m.to_ittm(TapeId::Scratch);
        let (back, tape) = OneTapeITTM::detect(&full).unwrap();
        assert_eq!(tape, TapeId::Scratch);
        assert_eq!(back, m);

        // A machine that copies the input bit to the scratch tape is not
        // one-tape on any tape.
        let copier = ITTMachine::from_fn(1, |_, t| IttmAction {
            write: [t[0], t[1], t[0]],
            dir: Dir::R,
            next: IttmTarget::Halt,
        });
        assert!(OneTapeITTM::detect(&copier).is_err());
        assert_eq!(
            OneTapeITTM::from_ittm(&copier, TapeId::Input),
            Err(NotOneTapeError::WritesOtherTapes { row: "S0".into(), tape: TapeId::Input })
        );
    }

    #[test]
    fn composed_successor_computes_x_plus_two() {
        let m = unary_successor();
        let budget = ExecBudget::default();
        let mut overheads = Vec::new();
        for x in 0..=4u64 {
            let comp = compose_theorem1(&m, x);
            assert_eq!(comp.machine.n_states(), comp.s);
            overheads.push(comp.s as u64 - x);
            let outcome = f_star(&comp.machine, 0, &budget, LimitRule::Limsup);
            assert_eq!(outcome, FStarOutcome::Value(x + 2), "x = {x}");
        }
        overheads.dedup();
        assert_eq!(overheads.len(), 1, "s(x) - x must not depend on x");
        assert_eq!(overheads[0], 11, "h(1) = 2*1 + 9");
    }

    #[test]
    fn composed_doubling_computes_four_x() {
        let m = unary_doubling();
        let budget = ExecBudget::default();
        for x in 0..=4u64 {
            let comp = compose_theorem1(&m, x);
            assert_eq!(comp.s, x as usize + 23, "h(7) = 2*7 + 9");

            // Independent oracle: run m twice by itself.
            let once = m.run_alone(EPTape::encode_unary(x), 100_000).unwrap();
            let twice = m.run_alone(once, 100_000).unwrap();
            let expected = twice.decode_unary().unwrap();
            assert_eq!(expected, 4 * x);

            let outcome = f_star(&comp.machine, 0, &budget, LimitRule::Limsup);
            assert_eq!(outcome, FStarOutcome::Value(expected), "x = {x}");
        }
    }

    #[test]
    fn composed_runs_halt_at_finite_stages() {
        let comp = compose_theorem1(&unary_doubling(), 3);
        let outcome = crate::exec::run_transfinite(
            &comp.machine,
            EPTape::blank(),
            &ExecBudget::default(),
            LimitRule::Limsup,
        );
        let snapshot = outcome.halted().expect("halts");
        assert_eq!(snapshot.stage.limits, 0, "no limit stages needed");
        assert_eq!(snapshot.tapes[TapeId::Output.index()], EPTape::encode_unary(12));
    }

    #[test]
    fn state_accounting_differences_match() {
        let m = unary_successor();
        let s7 = compose_theorem1(&m, 7).s;
        let s3 = compose_theorem1(&m, 3).s;
        assert_eq!(s7 - s3, 4);
    }

    #[test]
    fn reference_f_examples() {
        assert_eq!(reference_f(|i| i, 0), 0);
        assert_eq!(reference_f(|i| i, 2), 20);
        assert_eq!(reference_f(|_| 0, 3), 14);
    }

    #[test]
    fn reference_f_properties_hold_for_sampled_oracles() {
        let oracles: [(&str, fn(u64) -> u64); 3] =
            [("identity", |i| i), ("constant", |_| 7), ("successor", |i| i + 1)];
        for (name, f) in oracles {
            let mut prev = None;
            for x in 0..=50u64 {
                let v = reference_f(f, x);
                assert!(v >= f(x), "{name}: F({x}) >= f({x})");
                assert!(v >= x * x, "{name}: F({x}) >= {x}^2");
                if let Some(p) = prev {
                    assert!(v > p, "{name}: F strictly increasing at {x}");
                }
                prev = Some(v);
            }
        }
    }

    #[test]
    fn dominance_witness_examples() {
        let f: Vec<u64> = (0..50).map(|n: u64| n * n).collect();
        let g: Vec<u64> = (0..50).map(|n: u64| n + 10).collect();
        assert_eq!(dominance_witness(&f, &g, 50), DominanceWitness::WitnessFrom(4));

        let same: Vec<u64> = (0..50).collect();
        assert_eq!(dominance_witness(&same, &same, 50), DominanceWitness::NoneWithinHorizon);

        let above: Vec<u64> = (0..50).map(|n| n + 1).collect();
        assert_eq!(dominance_witness(&above, &same, 50), DominanceWitness::WitnessFrom(0));
    }

    #[test]
    fn fragment_exit_becomes_halt_and_limits_drift() {
        let comp = compose_theorem1(&unary_successor(), 1);
        let m = &comp.machine;
        // The limit row routes every triple to the trailing drift state.
        let dead = (m.n_states() - 1) as u16;
        for t in all_triples() {
            assert_eq!(m.action(RowId::Limit, t).next, IttmTarget::State(dead));
            assert_eq!(m.action(RowId::State(dead), t).next, IttmTarget::State(dead));
            assert_eq!(m.action(RowId::State(dead), t).dir, Dir::R);
        }
    }
}
