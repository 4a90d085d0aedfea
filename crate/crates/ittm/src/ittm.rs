//! Infinite-time Turing machines.
//!
//! A machine has three one-way infinite binary tapes (input, output,
//! scratch) sharing a single head, `n` ordinary states numbered from 0 (the
//! start state), a distinguished `Limit` state, and a `Halt` target. The
//! transition table is total over `(state, read triple)` for every ordinary
//! state and for `Limit`; successors name an ordinary state or `Halt`, never
//! `Limit` (the type of [`IttmTarget`] makes that unrepresentable).
//!
//! Successor steps behave classically, except a left move at cell 0 stays
//! at cell 0. At a limit stage every cell is set by the limit rule
//! ([`LimitRule::Limsup`] by default, liminf behind the flag), the head
//! returns to cell 0, and the machine enters `Limit`. Halting can only
//! happen at successor stages, since limit stages enter `Limit` by
//! definition.
//!
//! Stages are counted by [`OrdinalStage`]: `ω·b + c` for `b` completed
//! limit stages and `c` successor steps since the last one. Stages at or
//! beyond `ω²` are never reported as exact values; runs that would need
//! them end in a certificate or an undetermined verdict.

use std::fmt;

use crate::classical::Dir;
use crate::tape::{canonicalize, EPTape};

/// The three tapes, in read-triple order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TapeId {
    Input,
    Output,
    Scratch,
}

pub const TAPES: [TapeId; 3] = [TapeId::Input, TapeId::Output, TapeId::Scratch];

impl TapeId {
    pub fn index(self) -> usize {
        match self {
            TapeId::Input => 0,
            TapeId::Output => 1,
            TapeId::Scratch => 2,
        }
    }
}

impl fmt::Display for TapeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TapeId::Input => "input",
            TapeId::Output => "output",
            TapeId::Scratch => "scratch",
        })
    }
}

/// A read or write triple: one bit per tape, input first.
pub type Triple = [u8; 3];

pub fn triple_index(t: Triple) -> usize {
    (t[0] as usize) << 2 | (t[1] as usize) << 1 | t[2] as usize
}

pub fn triple_from_index(i: usize) -> Triple {
    [(i >> 2) as u8 & 1, (i >> 1) as u8 & 1, i as u8 & 1]
}

/// All eight read triples in table order.
pub fn all_triples() -> impl Iterator<Item = Triple> {
    (0..8).map(triple_from_index)
}

/// Successor of a transition: an ordinary state or `Halt`. `Limit` is not a
/// legal target, so "no transition into Limit" holds by construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum IttmTarget {
    State(u16),
    Halt,
}

/// One table entry: write `write`, move `dir`, continue as `next`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct IttmAction {
    pub write: Triple,
    pub dir: Dir,
    pub next: IttmTarget,
}

/// Which row of the table a transition is read from: an ordinary state or
/// the `Limit` state. (`Halt` has no row; nothing steps from it.)
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RowId {
    State(u16),
    Limit,
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowId::State(s) => write!(f, "S{s}"),
            RowId::Limit => f.write_str("LIM"),
        }
    }
}

/// A total transition table: `(n_states + 1) × 8` entries, the extra row
/// serving the `Limit` state.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ITTMachine {
    rows: Vec<[IttmAction; 8]>,
    limit_row: [IttmAction; 8],
}

impl ITTMachine {
    /// Panics if the table is empty or references a state out of range.
    pub fn new(rows: Vec<[IttmAction; 8]>, limit_row: [IttmAction; 8]) -> Self {
        assert!(!rows.is_empty(), "a machine needs at least one ordinary state");
        let n = rows.len() as u16;
        for action in rows.iter().flatten().chain(limit_row.iter()) {
            assert!(action.write.iter().all(|&b| b <= 1), "writes must be bits");
            if let IttmTarget::State(s) = action.next {
                assert!(s < n, "transition target S{s} out of range");
            }
        }
        ITTMachine { rows, limit_row }
    }

    /// Builds the full table from a function over `(row, read triple)`.
    pub fn from_fn(n_states: u16, mut f: impl FnMut(RowId, Triple) -> IttmAction) -> Self {
        let rows = (0..n_states)
            .map(|s| std::array::from_fn(|i| f(RowId::State(s), triple_from_index(i))))
            .collect();
        let limit_row = std::array::from_fn(|i| f(RowId::Limit, triple_from_index(i)));
        ITTMachine::new(rows, limit_row)
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn action(&self, row: RowId, triple: Triple) -> IttmAction {
        match row {
            RowId::State(s) => self.rows[s as usize][triple_index(triple)],
            RowId::Limit => self.limit_row[triple_index(triple)],
        }
    }

    pub fn rows(&self) -> &[[IttmAction; 8]] {
        &self.rows
    }

    pub fn limit_row(&self) -> &[IttmAction; 8] {
        &self.limit_row
    }

    /// Compact one-line encoding: the text-format lines joined by `;`.
    /// Deterministic, so it doubles as the tie-breaking sort key in
    /// searches and as the machine field of certificates.
    pub fn encode(&self) -> String {
        let mut lines = Vec::new();
        for (s, row) in self.rows.iter().enumerate() {
            for (i, action) in row.iter().enumerate() {
                lines.push(encode_entry(&format!("S{s}"), triple_from_index(i), action));
            }
        }
        for (i, action) in self.limit_row.iter().enumerate() {
            lines.push(encode_entry("LIM", triple_from_index(i), action));
        }
        lines.join(";")
    }
}

fn encode_entry(row: &str, triple: Triple, action: &IttmAction) -> String {
    let target = match action.next {
        IttmTarget::State(s) => format!("S{s}"),
        IttmTarget::Halt => "HALT".to_string(),
    };
    format!(
        "{row} ({},{},{}) -> ({},{},{}) {} {target}",
        triple[0], triple[1], triple[2], action.write[0], action.write[1], action.write[2], action.dir,
    )
}

/// Transfinite stage `ω·b + c`, ordered lexicographically. Printed in ASCII
/// as `w*b+c`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct OrdinalStage {
    pub limits: u64,
    pub steps: u64,
}

impl OrdinalStage {
    pub const ZERO: OrdinalStage = OrdinalStage { limits: 0, steps: 0 };

    pub fn new(limits: u64, steps: u64) -> Self {
        OrdinalStage { limits, steps }
    }

    /// True for `ω·b` with `b > 0`, the stages where the limit rule fires.
    pub fn is_limit(&self) -> bool {
        self.steps == 0 && self.limits > 0
    }
}

impl fmt::Display for OrdinalStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w*{}+{}", self.limits, self.steps)
    }
}

/// State a snapshot can be in.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum MachineState {
    Ordinary(u16),
    Limit,
    Halt,
}

impl fmt::Display for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineState::Ordinary(s) => write!(f, "S{s}"),
            MachineState::Limit => f.write_str("LIM"),
            MachineState::Halt => f.write_str("HALT"),
        }
    }
}

/// A complete machine configuration at some stage: the three tapes, the
/// shared head, the state, and the stage itself. At every limit stage the
/// head is 0 and the state is `Limit`; both are enforced by the only
/// constructor that produces limit snapshots, [`limit_snapshot`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Snapshot {
    pub tapes: [EPTape; 3],
    pub head: usize,
    pub state: MachineState,
    pub stage: OrdinalStage,
}

impl Snapshot {
    /// The start snapshot: `input` on the input tape, blank output and
    /// scratch, head 0, state 0, stage `w*0+0`.
    pub fn initial(input: EPTape) -> Self {
        Snapshot {
            tapes: [input, EPTape::blank(), EPTape::blank()],
            head: 0,
            state: MachineState::Ordinary(0),
            stage: OrdinalStage::ZERO,
        }
    }

    pub fn tape(&self, id: TapeId) -> &EPTape {
        &self.tapes[id.index()]
    }

    pub fn read_triple(&self) -> Triple {
        [
            self.tapes[0].get(self.head),
            self.tapes[1].get(self.head),
            self.tapes[2].get(self.head),
        ]
    }

    /// Equality of everything except the stage; this is the notion of
    /// "snapshot repetition" behind cycles and non-halting certificates.
    pub fn same_configuration(&self, other: &Snapshot) -> bool {
        self.tapes == other.tapes && self.head == other.head && self.state == other.state
    }

    /// The stage-free part, usable as a hash-map key.
    pub fn configuration(&self) -> ([EPTape; 3], usize, MachineState) {
        (self.tapes.clone(), self.head, self.state)
    }
}

/// Result of one successor step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepOutcome {
    Continue(Snapshot),
    /// The step transitioned into `Halt`; writes and the move were applied
    /// and the stage advanced, so halting stages always have `c ≥ 1`.
    Halted(Snapshot),
}

/// The row a snapshot's state selects, or `None` when halted.
pub fn active_row(snap: &Snapshot) -> Option<RowId> {
    match snap.state {
        MachineState::Ordinary(s) => Some(RowId::State(s)),
        MachineState::Limit => Some(RowId::Limit),
        MachineState::Halt => None,
    }
}

/// Applies one table entry to `snap`: the writes, the move (a left move at
/// cell 0 stays at cell 0), the stage increment, and the state change.
pub fn apply_action(snap: &Snapshot, action: IttmAction) -> StepOutcome {
    let mut next = snap.clone();
    for (tape, &bit) in next.tapes.iter_mut().zip(action.write.iter()) {
        tape.set(snap.head, bit);
    }
    next.head = match action.dir {
        Dir::L => snap.head.saturating_sub(1),
        Dir::R => snap.head + 1,
    };
    next.stage.steps += 1;
    match action.next {
        IttmTarget::State(s) => {
            next.state = MachineState::Ordinary(s);
            StepOutcome::Continue(next)
        }
        IttmTarget::Halt => {
            next.state = MachineState::Halt;
            StepOutcome::Halted(next)
        }
    }
}

/// Applies one successor step to `snap`.
///
/// Panics if `snap.state` is `Halt`; nothing steps from a halted snapshot.
pub fn successor_step(m: &ITTMachine, snap: &Snapshot) -> StepOutcome {
    let row = active_row(snap).expect("successor_step on a halted snapshot");
    apply_action(snap, m.action(row, snap.read_triple()))
}

/// Which limit rule fills the cells at limit stages.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub enum LimitRule {
    /// A cell that alternates cofinally often settles to 1.
    Limsup,
    /// A cell that alternates cofinally often settles to 0.
    Liminf,
}

impl LimitRule {
    pub fn name(self) -> &'static str {
        match self {
            LimitRule::Limsup => "limsup",
            LimitRule::Liminf => "liminf",
        }
    }
}

/// What a single cell's value sequence does cofinally below a limit stage.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellFate {
    /// The cell is eventually constant with this value; both rules keep it.
    EventuallyConstant(u8),
    /// The cell alternates cofinally often; the limit rule decides it.
    AlternatesCofinally,
}

impl CellFate {
    pub fn resolve(self, rule: LimitRule) -> u8 {
        match self {
            CellFate::EventuallyConstant(v) => v,
            CellFate::AlternatesCofinally => match rule {
                LimitRule::Limsup => 1,
                LimitRule::Liminf => 0,
            },
        }
    }
}

/// Per-cell fate summary for one tape across a whole block of successor
/// stages: cell `i` has fate `prefix[i]`, continuing periodically with
/// `period` beyond the prefix. Requiring this shape up front is what makes
/// the limit tape representable: a history whose cellwise summary is not
/// eventually periodic cannot be expressed as a `TapeFateSummary` at all.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TapeFateSummary {
    prefix: Vec<CellFate>,
    period: Vec<CellFate>,
}

impl TapeFateSummary {
    /// Panics if `period` is empty.
    pub fn new(mut prefix: Vec<CellFate>, mut period: Vec<CellFate>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        canonicalize(&mut prefix, &mut period);
        TapeFateSummary { prefix, period }
    }

    /// Summary from a cellwise envelope: where `upper` and `lower` agree
    /// the cell is eventually constant at that value, where they disagree
    /// it alternates cofinally. Resolving under limsup returns `upper`,
    /// under liminf `lower`.
    pub fn from_envelope(upper: &EPTape, lower: &EPTape) -> Self {
        let horizon = upper.prefix_len().max(lower.prefix_len());
        let span = crate::tape::lcm(upper.period().len(), lower.period().len());
        let fate = |i: usize| {
            let (u, l) = (upper.get(i), lower.get(i));
            if u == l {
                CellFate::EventuallyConstant(u)
            } else {
                CellFate::AlternatesCofinally
            }
        };
        TapeFateSummary::new(
            (0..horizon).map(fate).collect(),
            (horizon..horizon + span).map(fate).collect(),
        )
    }

    /// Every cell eventually constant at the given tape's values.
    pub fn frozen(tape: &EPTape) -> Self {
        TapeFateSummary::new(
            tape.prefix().iter().map(|&b| CellFate::EventuallyConstant(b)).collect(),
            tape.period().iter().map(|&b| CellFate::EventuallyConstant(b)).collect(),
        )
    }

    pub fn fate(&self, i: usize) -> CellFate {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// The limit tape under `rule`.
    pub fn resolve(&self, rule: LimitRule) -> EPTape {
        EPTape::new(
            self.prefix.iter().map(|f| f.resolve(rule)).collect(),
            self.period.iter().map(|f| f.resolve(rule)).collect(),
        )
    }
}

/// Builds the snapshot at the next limit stage from per-tape cell fates:
/// cells resolve by `rule`, the head returns to 0, the state becomes
/// `Limit`, and the stage becomes `ω·(b+1)` for the block that ran at
/// `ω·b + c`.
pub fn limit_snapshot(
    summaries: &[TapeFateSummary; 3],
    rule: LimitRule,
    block_stage: OrdinalStage,
) -> Snapshot {
    Snapshot {
        tapes: [
            summaries[0].resolve(rule),
            summaries[1].resolve(rule),
            summaries[2].resolve(rule),
        ],
        head: 0,
        state: MachineState::Limit,
        stage: OrdinalStage::new(block_stage.limits + 1, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn writer_action(write: Triple, dir: Dir, next: IttmTarget) -> IttmAction {
        IttmAction { write, dir, next }
    }

    /// One ordinary state: on blank triple, write a 1 on the output tape,
    /// move right, halt. Everything else is an unreachable self-loop.
    fn one_writer() -> ITTMachine {
        ITTMachine::from_fn(1, |row, triple| {
            if row == RowId::State(0) && triple == [0, 0, 0] {
                writer_action([0, 1, 0], Dir::R, IttmTarget::Halt)
            } else {
                writer_action(triple, Dir::R, IttmTarget::State(0))
            }
        })
    }

    #[test]
    fn one_writer_halts_at_stage_one_with_unary_one() {
        let snap = Snapshot::initial(EPTape::blank());
        match successor_step(&one_writer(), &snap) {
            StepOutcome::Halted(fin) => {
                assert_eq!(fin.stage, OrdinalStage::new(0, 1));
                assert_eq!(fin.stage.to_string(), "w*0+1");
                assert_eq!(fin.tape(TapeId::Output), &EPTape::encode_unary(1));
                assert!(fin.tape(TapeId::Input).is_blank());
                assert!(fin.tape(TapeId::Scratch).is_blank());
                assert_eq!(fin.head, 1);
                assert_eq!(fin.state, MachineState::Halt);
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn left_move_at_cell_zero_stays() {
        let m = ITTMachine::from_fn(1, |_, triple| {
            writer_action([1, triple[1], triple[2]], Dir::L, IttmTarget::State(0))
        });
        let snap = Snapshot::initial(EPTape::blank());
        let StepOutcome::Continue(next) = successor_step(&m, &snap) else {
            panic!("machine does not halt");
        };
        assert_eq!(next.head, 0);
        assert_eq!(next.tape(TapeId::Input), &EPTape::encode_unary(1));
        assert_eq!(next.stage, OrdinalStage::new(0, 1));
    }

    #[test]
    fn stage_order_is_lexicographic() {
        let mut stages = vec![
            OrdinalStage::new(1, 7),
            OrdinalStage::new(0, 5),
            OrdinalStage::new(2, 0),
            OrdinalStage::new(1, 0),
        ];
        stages.sort();
        assert_eq!(
            stages.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            ["w*0+5", "w*1+0", "w*1+7", "w*2+0"],
        );
        assert!(OrdinalStage::new(1, 7) < OrdinalStage::new(2, 0));
        assert!(OrdinalStage::new(1, 0).is_limit());
        assert!(!OrdinalStage::ZERO.is_limit());
    }

    #[test]
    fn alternating_cell_settles_by_rule() {
        let summary = TapeFateSummary::new(
            vec![CellFate::AlternatesCofinally, CellFate::EventuallyConstant(1)],
            vec![CellFate::EventuallyConstant(0)],
        );
        let up = summary.resolve(LimitRule::Limsup);
        let down = summary.resolve(LimitRule::Liminf);
        assert_eq!(up, EPTape::encode_unary(2));
        assert_eq!(down, EPTape::from_finite(vec![0, 1]));
        // Eventually constant cells are kept by both rules.
        assert_eq!(up.get(1), 1);
        assert_eq!(down.get(1), 1);
    }

    #[test]
    fn limit_snapshot_resets_head_and_enters_limit() {
        let frozen = TapeFateSummary::frozen(&EPTape::encode_unary(3));
        let snap = limit_snapshot(
            &[frozen.clone(), frozen.clone(), frozen],
            LimitRule::Limsup,
            OrdinalStage::new(0, 412),
        );
        assert_eq!(snap.head, 0);
        assert_eq!(snap.state, MachineState::Limit);
        assert_eq!(snap.stage, OrdinalStage::new(1, 0));
        assert!(snap.stage.is_limit());
        assert_eq!(snap.tape(TapeId::Input), &EPTape::encode_unary(3));
    }

    #[test]
    fn limsup_dominates_liminf_cellwise() {
        let summary = TapeFateSummary::new(
            vec![
                CellFate::AlternatesCofinally,
                CellFate::EventuallyConstant(0),
                CellFate::EventuallyConstant(1),
            ],
            vec![CellFate::AlternatesCofinally, CellFate::EventuallyConstant(0)],
        );
        let up = summary.resolve(LimitRule::Limsup);
        let down = summary.resolve(LimitRule::Liminf);
        for i in 0..32 {
            assert!(up.get(i) >= down.get(i), "cell {i}");
        }
    }

    #[test]
    fn encoding_mentions_every_row() {
        let enc = one_writer().encode();
        assert!(enc.contains("S0 (0,0,0) -> (0,1,0) R HALT"));
        assert!(enc.contains("LIM (1,1,1) -> (1,1,1) R S0"));
        assert_eq!(enc.matches(';').count(), 15);
    }
}
