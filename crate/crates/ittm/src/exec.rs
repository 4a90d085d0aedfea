//! Transfinite execution at desk scale.
//!
//! A run proceeds in blocks of successor stages, one block per limit
//! ordinal reached. Within a block every snapshot is recorded, and after
//! each new one the runner looks for a certifiable pattern:
//!
//! * a cycle: an earlier snapshot in the block has the same configuration
//!   (tapes, head, state; the stage never participates), so the block
//!   repeats that loop forever, or
//! * a drift: the machine replays an earlier stretch translated `d ≥ 1`
//!   cells to the right. With `m` the least head position over the
//!   stretch, equal states, and every tape satisfying
//!   `suffix_m(tapes at t0) = suffix_{m+d}(tapes at t0+p)`, induction
//!   pushes the match forward one period at a time: the head never drops
//!   below `m` again and each cell is rewritten only finitely often.
//!
//! Either pattern pins down the cellwise limit of the block, so the runner
//! jumps straight to the next limit stage. In a cycle, a cell that takes
//! both values inside the loop alternates cofinally and is settled by the
//! limit rule; under a drift every cell is eventually constant, with the
//! tail of the limit tape given by the `d` cells the replay lays down each
//! period, so both rules agree on it.
//!
//! Limit snapshots are also compared across blocks. When one configuration
//! recurs at two limit stages the run is certified non-halting: evolution
//! is determined by the configuration alone, so everything between the two
//! stages repeats from the second one, and a halt would already have
//! happened the first time around.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use crate::ittm::{
    limit_snapshot, successor_step, ITTMachine, LimitRule, MachineState, OrdinalStage, Snapshot,
    StepOutcome, TapeFateSummary, TapeId,
};
use crate::tape::EPTape;

/// How far back from the newest snapshot the drift scan reaches. Periods
/// longer than this window are never detected; the bound keeps a block of
/// `n` steps at `O(n)` candidate checks per step.
pub const DRIFT_SCAN_WINDOW: usize = 4096;

/// How many candidates per new snapshot get the full suffix comparison.
/// Beyond the cap the scan gives up for that snapshot; a real drift keeps
/// producing fresh candidate pairs, so it is found a few steps later
/// unless the history is adversarial. Verdicts stay sound either way,
/// since every reported pattern is re-verified before use.
pub const DRIFT_DEEP_VERIFY_CAP: usize = 32;

/// Which patterns the block runner looks for.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PatternDetection {
    CycleOnly,
    CycleAndDrift,
}

/// Resource limits for a transfinite run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ExecBudget {
    /// Successor steps allowed in one block before giving up on it.
    pub max_block_steps: u64,
    /// Largest `b` for which the stage `ω·b` may be entered.
    pub max_limit_stages: u64,
    pub detection: PatternDetection,
}

impl Default for ExecBudget {
    fn default() -> Self {
        ExecBudget {
            max_block_steps: 50_000,
            max_limit_stages: 64,
            detection: PatternDetection::CycleAndDrift,
        }
    }
}

/// A cycle inside one block: the snapshots at block offsets `t0` and
/// `t0 + p` have equal configurations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CycleReport {
    pub t0: usize,
    pub p: usize,
}

/// A right drift inside one block: the snapshot at offset `t0 + p` repeats
/// the one at `t0` translated `d` cells rightward, `m` being the least
/// head position between them. A window in which the head ever clamps
/// (a left move taken at cell 0) is never a drift: clamping does not
/// survive translation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DriftReport {
    pub t0: usize,
    pub p: usize,
    pub d: usize,
    pub m: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PatternReport {
    Cycle(CycleReport),
    Drift(DriftReport),
}

impl fmt::Display for PatternReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternReport::Cycle(c) => write!(f, "cycle t0={} p={}", c.t0, c.p),
            PatternReport::Drift(d) => {
                write!(f, "drift t0={} p={} d={} m={}", d.t0, d.p, d.d, d.m)
            }
        }
    }
}

/// Why a run ended without a verdict.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UndeterminedReason {
    /// The block budget ran out with full detection on: within the window
    /// and the budget, the block genuinely shows no cycle and no drift.
    NoPatternFound,
    /// The block budget ran out, but drift detection was switched off, so
    /// a pattern may simply have been missed.
    BlockBudget,
    /// The run would need more limit stages than allowed.
    LimitBudget,
}

impl UndeterminedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UndeterminedReason::NoPatternFound => "no-pattern-found",
            UndeterminedReason::BlockBudget => "block-budget",
            UndeterminedReason::LimitBudget => "limit-budget",
        }
    }
}

impl fmt::Display for UndeterminedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two limit snapshots with equal configurations; proof that the run never
/// halts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NonHaltingWitness {
    pub first: Snapshot,
    pub second: Snapshot,
}

impl NonHaltingWitness {
    /// Structural soundness: both snapshots sit at limit stages, in order,
    /// with equal configurations.
    pub fn verify(&self) -> bool {
        self.first.stage.is_limit()
            && self.second.stage.is_limit()
            && self.first.stage < self.second.stage
            && self.first.same_configuration(&self.second)
    }
}

/// Independent check on a witness: replay `steps` successor steps from
/// both snapshots and require the configurations to track each other
/// exactly without halting.
pub fn replay_agrees(m: &ITTMachine, witness: &NonHaltingWitness, steps: u64) -> bool {
    if !witness.verify() {
        return false;
    }
    let mut a = witness.first.clone();
    let mut b = witness.second.clone();
    for _ in 0..steps {
        let (sa, sb) = (successor_step(m, &a), successor_step(m, &b));
        match (sa, sb) {
            (StepOutcome::Continue(x), StepOutcome::Continue(y)) => {
                if !x.same_configuration(&y) {
                    return false;
                }
                a = x;
                b = y;
            }
            // A halt inside the replay contradicts the witness.
            _ => return false,
        }
    }
    true
}

/// Final verdict of a transfinite run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RunOutcome {
    Halted {
        snapshot: Snapshot,
    },
    NonHaltingCertified {
        witness: NonHaltingWitness,
    },
    Undetermined {
        reason: UndeterminedReason,
        stage: OrdinalStage,
    },
}

impl RunOutcome {
    pub fn halted(&self) -> Option<&Snapshot> {
        match self {
            RunOutcome::Halted { snapshot } => Some(snapshot),
            _ => None,
        }
    }
}

/// Everything observed on the way to a verdict: the snapshot entering each
/// limit stage and the pattern that justified the jump to it.
#[derive(Clone, Default, Debug)]
pub struct RunTrace {
    pub limit_snapshots: Vec<Snapshot>,
    pub patterns: Vec<PatternReport>,
}

type Config = ([EPTape; 3], usize, MachineState);

/// Outcome of one block of successor stages.
#[derive(Clone, Debug)]
pub enum BlockOutcome {
    Halted(Snapshot),
    /// A pattern was found; the history runs from the block's start
    /// through the pattern endpoint.
    Pattern(PatternReport, Vec<Snapshot>),
    /// The step budget ran out; the last snapshot reached.
    Exhausted(Snapshot),
}

/// Incremental pattern detection over a growing block history: push each
/// new snapshot and get back the first cycle or drift it completes. Used
/// by the block runner and by anything else that steps snapshots itself,
/// such as the enumerator working over partially assigned tables.
pub struct BlockScanner {
    history: Vec<Snapshot>,
    seen: HashMap<Config, usize>,
    detection: PatternDetection,
    /// Drift is probed every this many pushes. Cycle detection is a map
    /// hit and always runs; the backward drift scan is the costly part,
    /// so bulk consumers thin it out and finish with [`Self::probe_drift`].
    drift_interval: usize,
}

impl BlockScanner {
    pub fn new(start: Snapshot, detection: PatternDetection) -> Self {
        Self::with_drift_interval(start, detection, 1)
    }

    pub fn with_drift_interval(
        start: Snapshot,
        detection: PatternDetection,
        drift_interval: usize,
    ) -> Self {
        assert!(drift_interval >= 1);
        let mut seen = HashMap::new();
        seen.insert(start.configuration(), 0);
        BlockScanner { history: vec![start], seen, detection, drift_interval }
    }

    /// Runs the drift scan against the newest snapshot regardless of the
    /// probe interval.
    pub fn probe_drift(&self) -> Option<PatternReport> {
        if self.detection != PatternDetection::CycleAndDrift || self.history.len() < 2 {
            return None;
        }
        drift_at(&self.history, self.history.len() - 1).map(PatternReport::Drift)
    }

    /// Records one more snapshot; reports the pattern it completes, if any.
    pub fn push(&mut self, snap: Snapshot) -> Option<PatternReport> {
        self.history.push(snap);
        let t1 = self.history.len() - 1;
        match self.seen.entry(self.history[t1].configuration()) {
            Entry::Occupied(e) => {
                let t0 = *e.get();
                return Some(PatternReport::Cycle(CycleReport { t0, p: t1 - t0 }));
            }
            Entry::Vacant(v) => {
                v.insert(t1);
            }
        }
        if self.detection == PatternDetection::CycleAndDrift && t1 % self.drift_interval == 0 {
            if let Some(report) = drift_at(&self.history, t1) {
                return Some(PatternReport::Drift(report));
            }
        }
        None
    }

    pub fn history(&self) -> &[Snapshot] {
        &self.history
    }

    pub fn last(&self) -> &Snapshot {
        self.history.last().expect("history is never empty")
    }

    pub fn into_history(self) -> Vec<Snapshot> {
        self.history
    }
}

fn drift_at(history: &[Snapshot], t1: usize) -> Option<DriftReport> {
    let newest = &history[t1];
    let mut m = newest.head;
    let mut deep = 0;
    for t0 in (t1.saturating_sub(DRIFT_SCAN_WINDOW)..t1).rev() {
        let old = &history[t0];
        // A left move at cell 0 stays at cell 0. Such a clamped step
        // does not translate: replayed d cells to the right it really
        // moves left, so no window containing one is a drift. Clamps
        // are visible in the history as two equal consecutive heads.
        if old.head == history[t0 + 1].head {
            return None;
        }
        // Running minimum of the head over [t0, t1].
        m = m.min(old.head);
        if old.state != newest.state || newest.head <= old.head {
            continue;
        }
        let d = newest.head - old.head;
        deep += 1;
        if deep > DRIFT_DEEP_VERIFY_CAP {
            return None;
        }
        let tapes_match = (0..3).all(|i| old.tapes[i].suffix(m) == newest.tapes[i].suffix(m + d));
        if tapes_match {
            return Some(DriftReport { t0, p: t1 - t0, d, m });
        }
    }
    None
}

/// Scans a block history for the earliest cycle: smallest `t0 + p` first,
/// and for that endpoint the unique earlier occurrence.
pub fn detect_cycle(history: &[Snapshot]) -> Option<CycleReport> {
    let mut seen: HashMap<Config, usize> = HashMap::new();
    for (t, snap) in history.iter().enumerate() {
        match seen.entry(snap.configuration()) {
            Entry::Occupied(e) => {
                let t0 = *e.get();
                return Some(CycleReport { t0, p: t - t0 });
            }
            Entry::Vacant(v) => {
                v.insert(t);
            }
        }
    }
    None
}

/// Scans a block history for the earliest drift: smallest `t0 + p` first,
/// then smallest `p` (the scan walks `t0` downward from the endpoint),
/// within the window and verification cap.
pub fn detect_drift(history: &[Snapshot]) -> Option<DriftReport> {
    (1..history.len()).find_map(|t1| drift_at(history, t1))
}

/// Runs one block of successor stages from `start` until a halt, a
/// detected pattern, or the block step budget.
pub fn run_block(m: &ITTMachine, start: Snapshot, budget: &ExecBudget) -> BlockOutcome {
    let mut scanner = BlockScanner::new(start, budget.detection);
    for _ in 0..budget.max_block_steps {
        match successor_step(m, scanner.last()) {
            StepOutcome::Halted(snapshot) => return BlockOutcome::Halted(snapshot),
            StepOutcome::Continue(next) => {
                if let Some(report) = scanner.push(next) {
                    return BlockOutcome::Pattern(report, scanner.into_history());
                }
            }
        }
    }
    let last = scanner.last().clone();
    BlockOutcome::Exhausted(last)
}

/// The limit snapshot a verified pattern forces, plus the per-cell fates
/// it was derived from.
#[derive(Clone, Debug)]
pub struct OmegaLimit {
    pub snapshot: Snapshot,
    pub summaries: [TapeFateSummary; 3],
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum OmegaLimitError {
    #[error("pattern indices extend past the recorded history")]
    OutOfRange,
    #[error("pattern does not verify against the history: {0}")]
    Mismatch(&'static str),
}

/// Re-verifies a pattern against its block history and, on success, builds
/// the snapshot at the next limit stage.
///
/// A history whose cells do not settle into an eventually periodic shape
/// never gets here: such a block has no cycle and no drift, so there is no
/// pattern to hand in, and the run ends undetermined instead.
pub fn omega_limit(
    report: &PatternReport,
    history: &[Snapshot],
    rule: LimitRule,
) -> Result<OmegaLimit, OmegaLimitError> {
    let (t0, p) = match report {
        PatternReport::Cycle(c) => (c.t0, c.p),
        PatternReport::Drift(d) => (d.t0, d.p),
    };
    if p == 0 {
        return Err(OmegaLimitError::Mismatch("period must be positive"));
    }
    let t1 = t0 + p;
    if t1 >= history.len() {
        return Err(OmegaLimitError::OutOfRange);
    }
    let summaries: [TapeFateSummary; 3] = match report {
        PatternReport::Cycle(_) => {
            if !history[t0].same_configuration(&history[t1]) {
                return Err(OmegaLimitError::Mismatch("cycle endpoints differ"));
            }
            std::array::from_fn(|i| {
                let mut upper = history[t0].tapes[i].clone();
                let mut lower = upper.clone();
                for snap in &history[t0 + 1..t1] {
                    upper = upper.cellwise_or(&snap.tapes[i]);
                    lower = lower.cellwise_and(&snap.tapes[i]);
                }
                TapeFateSummary::from_envelope(&upper, &lower)
            })
        }
        PatternReport::Drift(drift) => {
            let (old, newest) = (&history[t0], &history[t1]);
            if drift.d == 0 {
                return Err(OmegaLimitError::Mismatch("drift distance must be positive"));
            }
            if old.state != newest.state {
                return Err(OmegaLimitError::Mismatch("drift endpoints disagree on state"));
            }
            if newest.head != old.head + drift.d {
                return Err(OmegaLimitError::Mismatch("drift distance disagrees with heads"));
            }
            if (t0..t1).any(|t| history[t].head == history[t + 1].head) {
                return Err(OmegaLimitError::Mismatch(
                    "period contains a clamped left move at cell 0",
                ));
            }
            let m = history[t0..=t1].iter().map(|s| s.head).min().expect("nonempty range");
            if m != drift.m {
                return Err(OmegaLimitError::Mismatch("claimed least head position is wrong"));
            }
            let shifted_match =
                (0..3).all(|i| old.tapes[i].suffix(m) == newest.tapes[i].suffix(m + drift.d));
            if !shifted_match {
                return Err(OmegaLimitError::Mismatch("tape suffixes do not match shifted"));
            }
            // Cells below m are frozen from t0 on; cell m + j·d + r is
            // last written during the block whose floor passes it and
            // lands on the value at m + r now.
            std::array::from_fn(|i| {
                let tape = &newest.tapes[i];
                let prefix = (0..m).map(|c| crate::ittm::CellFate::EventuallyConstant(tape.get(c)));
                let period =
                    (m..m + drift.d).map(|c| crate::ittm::CellFate::EventuallyConstant(tape.get(c)));
                TapeFateSummary::new(prefix.collect(), period.collect())
            })
        }
    };
    Ok(OmegaLimit {
        snapshot: limit_snapshot(&summaries, rule, history[t1].stage),
        summaries,
    })
}

/// Runs a machine on `input` until it halts, is certified non-halting, or
/// exhausts the budget, recording limit snapshots and the patterns behind
/// them.
pub fn run_transfinite_traced(
    m: &ITTMachine,
    input: EPTape,
    budget: &ExecBudget,
    rule: LimitRule,
) -> (RunOutcome, RunTrace) {
    let mut trace = RunTrace::default();
    let mut limit_seen: HashMap<Config, Snapshot> = HashMap::new();
    let mut current = Snapshot::initial(input);
    loop {
        match run_block(m, current, budget) {
            BlockOutcome::Halted(snapshot) => return (RunOutcome::Halted { snapshot }, trace),
            BlockOutcome::Exhausted(last) => {
                let reason = match budget.detection {
                    PatternDetection::CycleAndDrift => UndeterminedReason::NoPatternFound,
                    PatternDetection::CycleOnly => UndeterminedReason::BlockBudget,
                };
                return (RunOutcome::Undetermined { reason, stage: last.stage }, trace);
            }
            BlockOutcome::Pattern(report, history) => {
                let limit = omega_limit(&report, &history, rule)
                    .expect("a detected pattern always re-verifies");
                trace.patterns.push(report);
                trace.limit_snapshots.push(limit.snapshot.clone());
                if let Some(first) = limit_seen.get(&limit.snapshot.configuration()) {
                    let witness =
                        NonHaltingWitness { first: first.clone(), second: limit.snapshot };
                    return (RunOutcome::NonHaltingCertified { witness }, trace);
                }
                if limit.snapshot.stage.limits > budget.max_limit_stages {
                    return (
                        RunOutcome::Undetermined {
                            reason: UndeterminedReason::LimitBudget,
                            stage: limit.snapshot.stage,
                        },
                        trace,
                    );
                }
                limit_seen.insert(limit.snapshot.configuration(), limit.snapshot.clone());
                current = limit.snapshot;
            }
        }
    }
}

/// [`run_transfinite_traced`] without the trace.
pub fn run_transfinite(
    m: &ITTMachine,
    input: EPTape,
    budget: &ExecBudget,
    rule: LimitRule,
) -> RunOutcome {
    run_transfinite_traced(m, input, budget, rule).0
}

/// Value of the machine's partial function at `n`: run on the unary
/// numeral for `n`; if the run halts and the output tape is again a unary
/// numeral, that numeral is the value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FStarOutcome {
    Value(u64),
    /// Certified non-halting on this input; no value.
    Diverges,
    /// Halted, but the output tape is not a unary numeral; no value.
    NotUnary,
    Undetermined {
        reason: UndeterminedReason,
        stage: OrdinalStage,
    },
}

impl FStarOutcome {
    pub fn value(&self) -> Option<u64> {
        match self {
            FStarOutcome::Value(v) => Some(*v),
            _ => None,
        }
    }
}

pub fn f_star(m: &ITTMachine, n: u64, budget: &ExecBudget, rule: LimitRule) -> FStarOutcome {
    match run_transfinite(m, EPTape::encode_unary(n), budget, rule) {
        RunOutcome::Halted { snapshot } => match snapshot.tape(TapeId::Output).decode_unary() {
            Some(v) => FStarOutcome::Value(v),
            None => FStarOutcome::NotUnary,
        },
        RunOutcome::NonHaltingCertified { .. } => FStarOutcome::Diverges,
        RunOutcome::Undetermined { reason, stage } => FStarOutcome::Undetermined { reason, stage },
    }
}
