//! Exact non-halting deciders for classical machines.
//!
//! Every verdict here is proof-backed; nothing is classified by heuristic.
//! Six certifying arguments are tried in order of cost:
//!
//! * dead halt entries: ignoring read bits, walk the state graph from the
//!   start state; states only reachable through transitions that are never
//!   taken are still counted reachable, so if no reachable state carries a
//!   halt entry the machine certainly runs forever. This kills tables
//!   whose halt sits on a self-looping island that backward chaining can
//!   never refute;
//! * exact cycle: some configuration (state, head, tape) recurs, found by
//!   Brent's algorithm in constant memory;
//! * translated cycle: at two record times (the head strictly beyond every
//!   earlier position) with equal state, the tape from the lowest
//!   intermediate head position up to the head matches shifted by the head
//!   difference. Everything beyond a record is untouched blank, so the
//!   machine replays the stretch forever, translated further each time;
//! * halting unreachability: every chain of predecessor steps leading into
//!   a halt entry contradicts itself within a bounded depth on the cells
//!   it constrains, so no halting configuration is reachable at all. The
//!   machine with no halt entries is the degenerate case;
//! * saturated-run closure: tapes are abstracted to run-length words whose
//!   counts cap out at a small bound, making the reachable abstract set
//!   finite for machines that only grow a few uniform blocks. If that set
//!   is closed and halt-free, so is the concrete run. This is the one that
//!   reaches sweepers and zigzag growers, which repeat nothing exactly;
//! * automaton closure: each half-tape is collapsed to the state of a
//!   small scanning automaton, leaving finitely many abstract
//!   configurations however rich the tape gets. Closure of that system is
//!   searched over many scanner pairs, and any closed halt-free pair is a
//!   proof. This reaches the binary counters, whose tapes grow patterns
//!   too irregular for run-length bounds.
//!
//! Machines none of the arguments reach stay `Undecided`; a caller
//! aggregating a search must then degrade its status honestly rather than
//! guess.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::classical::{
    step_classical_mut, ClassicalAction, ClassicalConfig, ClassicalMachine, ClassicalTarget, Dir,
    FiniteTapeWindow,
};

/// Resource limits for one decision attempt.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DeciderBudget {
    /// Total forward steps before giving up on running to a halt.
    pub forward_steps: u64,
    /// Steps during which the cycle and translated-cycle machinery is
    /// active (it stores record snapshots, so it is the memory-hungry
    /// part; beyond this the run continues bare).
    pub pattern_steps: u64,
    /// Backward-chaining depth.
    pub backward_depth: u32,
    /// Backward-chaining total node cap across all halt entries.
    pub backward_nodes: u64,
    /// Abstract configurations explored by the saturated-run closure
    /// before it gives up; 0 disables the stage.
    pub closure_configs: u64,
    /// Largest scanning automaton tried per tape side by the automaton
    /// closure; 0 disables the stage.
    pub automata_states: u8,
    /// Automaton pairs tried before the automaton closure gives up.
    pub automata_pairs: u64,
}

impl Default for DeciderBudget {
    fn default() -> Self {
        DeciderBudget {
            forward_steps: 10_000,
            pattern_steps: 2_000,
            backward_depth: 12,
            backward_nodes: 20_000,
            closure_configs: 10_000,
            automata_states: 4,
            automata_pairs: 200_000,
        }
    }
}

/// Most record snapshots kept per direction; a genuine translated cycler
/// recurs long before this many records accumulate.
const RECORD_CAP: usize = 512;
/// Earlier same-state records compared against each new record.
const RECORD_COMPARE_CAP: usize = 24;

/// Why a machine certifiably never halts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NonHaltProof {
    /// No transition targets halt at all.
    NoHaltEntries,
    /// Configurations at steps `t0` and `t0 + p` are identical.
    ExactCycle { t0: u64, p: u64 },
    /// The configuration at the later record repeats the earlier one
    /// shifted `d` cells (positive right, negative left).
    TranslatedCycle { t0: u64, p: u64, d: i64 },
    /// Backward chaining refuted every path into a halt entry.
    HaltUnreachable { depth: u32 },
    /// Every state holding a halt entry is unreachable in the state
    /// graph, read bits ignored.
    DeadHaltEntries,
    /// The saturated-run abstraction closed over `configs` abstract
    /// configurations without touching a halt entry.
    AbstractClosure { configs: u64 },
    /// Scanning each half-tape with a small automaton (of the recorded
    /// sizes) yields a finite abstract system that is closed and
    /// halt-free.
    AutomatonClosure { left_states: u8, right_states: u8 },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClassicalVerdict {
    Halted { steps: u64, tape: FiniteTapeWindow },
    NonHalting(NonHaltProof),
    Undecided,
}

impl ClassicalVerdict {
    pub fn is_decided(&self) -> bool {
        !matches!(self, ClassicalVerdict::Undecided)
    }
}

struct RecordSnapshot {
    time: u64,
    state: u8,
    head: i64,
    /// Global head minimum (right records) or maximum (left records) at
    /// the time, the low end of `segment`'s coordinates.
    global_edge: i64,
    /// Tape cells `[global_edge ..= head]` for right records, or
    /// `[head ..= global_edge]` for left ones.
    segment: Vec<u8>,
}

/// Compares two right records: does the tape over `[m, head0]` at the
/// earlier record equal the tape over `[m + d, head1]` at the later one?
/// Cells the earlier record had not visited yet read as blank.
fn right_records_match(earlier: &RecordSnapshot, later: &RecordSnapshot, m: i64) -> bool {
    let d = later.head - earlier.head;
    debug_assert!(d > 0);
    for offset in m..=earlier.head {
        let at_earlier = if offset < earlier.global_edge {
            0
        } else {
            earlier.segment[(offset - earlier.global_edge) as usize]
        };
        let shifted = offset + d;
        let at_later = if shifted < later.global_edge {
            0
        } else {
            later.segment[(shifted - later.global_edge) as usize]
        };
        if at_earlier != at_later {
            return false;
        }
    }
    true
}

/// Mirror image of [`right_records_match`] for leftward records.
fn left_records_match(earlier: &RecordSnapshot, later: &RecordSnapshot, m: i64) -> bool {
    let d = earlier.head - later.head;
    debug_assert!(d > 0);
    for offset in earlier.head..=m {
        let at_earlier = if offset > earlier.global_edge {
            0
        } else {
            earlier.segment[(offset - earlier.head) as usize]
        };
        let shifted = offset - d;
        let at_later = if shifted > later.global_edge {
            0
        } else {
            later.segment[(shifted - later.head) as usize]
        };
        if at_earlier != at_later {
            return false;
        }
    }
    true
}

/// Incremental cycle and translated-cycle detection over a run observed
/// one configuration at a time. The caller steps the machine (however it
/// likes, including over a partially assigned table) and feeds each
/// configuration in; the watcher answers with a proof when one appears.
pub(crate) struct PatternWatcher {
    /// Head position at every observed step, for the least-head scans.
    heads: Vec<i64>,
    // Brent: one stored reference configuration, doubling checkpoints.
    reference: ClassicalConfig,
    reference_time: u64,
    power: u64,
    lam: u64,
    right_records: Vec<RecordSnapshot>,
    left_records: Vec<RecordSnapshot>,
    max_head: i64,
    min_head: i64,
    /// Steps during which record snapshots are still collected.
    pattern_steps: u64,
}

impl PatternWatcher {
    pub(crate) fn new(start: &ClassicalConfig, pattern_steps: u64) -> Self {
        PatternWatcher {
            heads: vec![start.head],
            reference: start.clone(),
            reference_time: 0,
            power: 1,
            lam: 0,
            right_records: Vec::new(),
            left_records: Vec::new(),
            max_head: start.head,
            min_head: start.head,
            pattern_steps,
        }
    }

    /// Observes the configuration after step number `step` (1-based and
    /// consecutive).
    pub(crate) fn observe(&mut self, step: u64, config: &ClassicalConfig) -> Option<NonHaltProof> {
        let patterns_active = step <= self.pattern_steps;
        if patterns_active {
            self.heads.push(config.head);
        }

        // Brent's check: state and head first, the tape only on a hit.
        self.lam += 1;
        if config.state == self.reference.state
            && config.head == self.reference.head
            && config.tape == self.reference.tape
        {
            return Some(NonHaltProof::ExactCycle { t0: self.reference_time, p: self.lam });
        }
        if self.lam == self.power {
            self.reference = config.clone();
            self.reference_time = step;
            self.power *= 2;
            self.lam = 0;
        }

        if !patterns_active {
            return None;
        }
        if config.head > self.max_head {
            self.max_head = config.head;
            try_record(&mut self.right_records, &self.heads, step, config, self.min_head, true)
        } else if config.head < self.min_head {
            self.min_head = config.head;
            try_record(&mut self.left_records, &self.heads, step, config, self.max_head, false)
        } else {
            None
        }
    }
}

/// Forward simulation with Brent cycle detection and record-based
/// translated-cycle detection.
fn forward_stage(m: &ClassicalMachine, budget: &DeciderBudget) -> ClassicalVerdict {
    let mut config = ClassicalConfig::blank();
    let mut watcher = PatternWatcher::new(&config, budget.pattern_steps);
    for step in 1..=budget.forward_steps {
        if let Some(tape) = step_classical_mut(m, &mut config) {
            return ClassicalVerdict::Halted { steps: step, tape };
        }
        if let Some(proof) = watcher.observe(step, &config) {
            return ClassicalVerdict::NonHalting(proof);
        }
    }
    ClassicalVerdict::Undecided
}

/// Checks a fresh record against stored same-state records and stores it.
fn try_record(
    records: &mut Vec<RecordSnapshot>,
    heads: &[i64],
    time: u64,
    config: &ClassicalConfig,
    global_edge: i64,
    rightward: bool,
) -> Option<NonHaltProof> {
    let snapshot = RecordSnapshot {
        time,
        state: config.state,
        head: config.head,
        global_edge,
        segment: if rightward {
            (global_edge..=config.head).map(|pos| config.tape.get(pos)).collect()
        } else {
            (config.head..=global_edge).map(|pos| config.tape.get(pos)).collect()
        },
    };
    let mut compared = 0;
    for earlier in records.iter().rev() {
        if compared >= RECORD_COMPARE_CAP {
            break;
        }
        if earlier.state != snapshot.state {
            continue;
        }
        compared += 1;
        let between = &heads[earlier.time as usize..=snapshot.time as usize];
        let matched = if rightward {
            let m = *between.iter().min().expect("nonempty range");
            right_records_match(earlier, &snapshot, m)
        } else {
            let m = *between.iter().max().expect("nonempty range");
            left_records_match(earlier, &snapshot, m)
        };
        if matched {
            let d = snapshot.head - earlier.head;
            return Some(NonHaltProof::TranslatedCycle {
                t0: earlier.time,
                p: snapshot.time - earlier.time,
                d,
            });
        }
    }
    if records.len() < RECORD_CAP {
        records.push(snapshot);
    }
    None
}

/// A partially known configuration during backward chaining: the state,
/// the head, and the tape cells pinned so far (coordinates relative to
/// the halting read).
struct BackNode {
    state: u8,
    head: i64,
    cells: HashMap<i64, u8>,
    depth: u32,
}

/// Tries to refute reachability of every halt entry by depth-bounded
/// backward chaining. Returns the depth on success, `None` when some
/// chain survives (reaching a possible start, exceeding the depth, or
/// blowing the node cap).
fn backward_stage(m: &ClassicalMachine, budget: &DeciderBudget) -> Option<u32> {
    // Predecessor edges into each state: (from-state, read-bit, action).
    let mut into: Vec<Vec<(u8, u8, ClassicalAction)>> = vec![Vec::new(); m.n_states()];
    for (q, row) in m.rows().iter().enumerate() {
        for (bit, action) in row.iter().enumerate() {
            if let ClassicalTarget::State(s) = action.next {
                into[s as usize].push((q as u8, bit as u8, *action));
            }
        }
    }

    let mut nodes_left = budget.backward_nodes;
    let mut stack: Vec<BackNode> = Vec::new();
    for (q, row) in m.rows().iter().enumerate() {
        for (bit, action) in row.iter().enumerate() {
            if action.next != ClassicalTarget::Halt {
                continue;
            }
            stack.push(BackNode {
                state: q as u8,
                head: 0,
                cells: HashMap::from([(0, bit as u8)]),
                depth: 0,
            });
        }
    }

    while let Some(node) = stack.pop() {
        if nodes_left == 0 {
            return None;
        }
        nodes_left -= 1;

        // A consistent all-blank configuration in the start state could be
        // the actual step 0; the chain survives, nothing is refuted.
        if node.state == 0 && node.cells.values().all(|&b| b == 0) {
            return None;
        }
        if node.depth >= budget.backward_depth {
            return None;
        }
        for &(p, read, action) in &into[node.state as usize] {
            let prev_head = node.head - action.dir.delta();
            // The predecessor step wrote `action.write` at `prev_head`;
            // if we already pinned that cell differently, this chain is
            // contradictory and dies here.
            if let Some(&pinned) = node.cells.get(&prev_head) {
                if pinned != action.write {
                    continue;
                }
            }
            let mut cells = node.cells.clone();
            cells.insert(prev_head, read);
            stack.push(BackNode { state: p, head: prev_head, cells, depth: node.depth + 1 });
        }
        // If no predecessor was consistent, the branch simply ends here:
        // refuted. The loop continues with the remaining branches.
    }
    Some(budget.backward_depth)
}

/// States reachable from the start by following transition targets with
/// read bits ignored: an over-approximation of what any run can visit.
fn graph_reachable(m: &ClassicalMachine) -> Vec<bool> {
    let mut reach = vec![false; m.n_states()];
    reach[0] = true;
    let mut stack = vec![0u8];
    while let Some(q) = stack.pop() {
        for bit in [0, 1] {
            if let ClassicalTarget::State(t) = m.action(q, bit).next {
                if !reach[t as usize] {
                    reach[t as usize] = true;
                    stack.push(t);
                }
            }
        }
    }
    reach
}

/// Run counts below this value are kept exact.
const CLOSURE_SATURATION: u8 = 4;
/// Saturated counts keep their residue class modulo this: growers that
/// protect a halt entry by the parity of a block width need the residue
/// to close.
const CLOSURE_MODULUS: u8 = 2;

/// Run-length encoded half-tape, nearest run first. Counts below
/// [`CLOSURE_SATURATION`] are exact; a count `SATURATION + r` stands for
/// every length at least `SATURATION` that is congruent to it modulo
/// [`CLOSURE_MODULUS`]. Trailing runs of 0 are stripped: beyond the last
/// run the side is blank forever.
type HalfTape = Vec<(u8, u8)>;

/// Most runs kept per tape side before the abstraction gives up; machines
/// building rich mixed patterns (counters, say) blow past this quickly
/// and fall through as undecided.
const CLOSURE_RUN_CAP: usize = 16;

fn count_increment(count: u8) -> u8 {
    if count < CLOSURE_SATURATION - 1 {
        count + 1
    } else if count < CLOSURE_SATURATION {
        CLOSURE_SATURATION
    } else {
        let r = count - CLOSURE_SATURATION;
        CLOSURE_SATURATION + (r + 1) % CLOSURE_MODULUS
    }
}

/// Possible counts after removing one cell from a run. A saturated class
/// holds its least member and everything `MODULUS` apart above it, so
/// decrementing the class at the least member can also drop into exact
/// territory.
fn count_decrements(count: u8) -> Vec<Option<u8>> {
    if count < CLOSURE_SATURATION {
        if count == 1 {
            vec![None]
        } else {
            vec![Some(count - 1)]
        }
    } else {
        let r = count - CLOSURE_SATURATION;
        if r == 0 {
            // The class holds the saturation value itself and everything a
            // modulus above; one less is either exact or wraps the class.
            vec![Some(CLOSURE_SATURATION - 1), Some(CLOSURE_SATURATION + CLOSURE_MODULUS - 1)]
        } else {
            vec![Some(CLOSURE_SATURATION + r - 1)]
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct AbstractConfig {
    state: u8,
    /// Strictly left of the head.
    left: HalfTape,
    /// Starts at the head cell.
    right: HalfTape,
}

fn half_front_bit(side: &HalfTape) -> u8 {
    side.first().map_or(0, |&(bit, _)| bit)
}

/// Prepends one concrete cell, merging into the first run with the
/// saturating count. `None` when the side outgrows the run cap.
fn half_push(side: &HalfTape, bit: u8) -> Option<HalfTape> {
    let mut out = side.clone();
    match out.first_mut() {
        Some((b, count)) if *b == bit => *count = count_increment(*count),
        _ => out.insert(0, (bit, 1)),
    }
    while out.last().is_some_and(|&(b, _)| b == 0) {
        out.pop();
    }
    if out.len() > CLOSURE_RUN_CAP {
        return None;
    }
    Some(out)
}

/// Removes one cell from the front: one remainder per possible count of
/// the first run. An empty side is blank forever and stays empty.
fn half_pop(side: &HalfTape) -> Vec<HalfTape> {
    let Some(&(bit, count)) = side.first() else {
        return vec![Vec::new()];
    };
    count_decrements(count)
        .into_iter()
        .map(|remaining| match remaining {
            None => side[1..].to_vec(),
            Some(count) => {
                let mut out = side.clone();
                out[0] = (bit, count);
                out
            }
        })
        .collect()
}

enum ClosureAbort {
    HaltReachable,
    RunCapExceeded,
}

fn abstract_successors(
    cfg: &AbstractConfig,
    m: &ClassicalMachine,
) -> Result<Vec<AbstractConfig>, ClosureAbort> {
    let read = half_front_bit(&cfg.right);
    let action = m.action(cfg.state, read);
    let ClassicalTarget::State(next) = action.next else {
        return Err(ClosureAbort::HaltReachable);
    };
    let mut out = Vec::new();
    for right_rest in half_pop(&cfg.right) {
        match action.dir {
            Dir::R => {
                let left = half_push(&cfg.left, action.write).ok_or(ClosureAbort::RunCapExceeded)?;
                out.push(AbstractConfig { state: next, left, right: right_rest });
            }
            Dir::L => {
                // The written cell sits right of the new head; the new
                // head cell is taken off the left side.
                let with_write =
                    half_push(&right_rest, action.write).ok_or(ClosureAbort::RunCapExceeded)?;
                let head_bit = half_front_bit(&cfg.left);
                let right =
                    half_push(&with_write, head_bit).ok_or(ClosureAbort::RunCapExceeded)?;
                for left in half_pop(&cfg.left) {
                    out.push(AbstractConfig { state: next, left, right: right.clone() });
                }
            }
        }
    }
    Ok(out)
}

/// Explores every abstract configuration reachable from blank when run
/// lengths saturate at [`CLOSURE_SATURATION`]. The abstraction only ever
/// over-approximates: reads are exact (the first run's bit, or blank),
/// and consuming from a saturated run branches into both possible
/// remainders, so each concrete step lands inside some abstract
/// successor. If the whole reachable abstract set is closed and no halt
/// entry fires, no concrete run can halt; sweepers and zigzag growers
/// whose tapes are a few long uniform blocks close quickly. Returns the
/// closed set's size, or `None` when the abstraction halts somewhere,
/// outgrows the run cap, or exceeds the config budget.
fn closure_stage(m: &ClassicalMachine, budget: &DeciderBudget) -> Option<u64> {
    if budget.closure_configs == 0 {
        return None;
    }
    let start = AbstractConfig { state: 0, left: Vec::new(), right: Vec::new() };
    let mut visited = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(cfg) = queue.pop_front() {
        let successors = abstract_successors(&cfg, m).ok()?;
        for succ in successors {
            if visited.contains(&succ) {
                continue;
            }
            if visited.len() as u64 >= budget.closure_configs {
                return None;
            }
            visited.insert(succ.clone());
            queue.push_back(succ);
        }
    }
    Some(visited.len() as u64)
}

/// Transition table of a deterministic scanner over tape bits. State 0
/// is the start and absorbs blanks (`delta[0][0] == 0`), so padding a
/// half-tape with more blank never changes where a scan lands.
#[derive(Clone)]
struct ScanDfa {
    delta: Vec<[u8; 2]>,
}

impl ScanDfa {
    /// Incoming edges per state: `co[s]` lists every `(source, bit)` with
    /// `delta[source][bit] == s`. Running a scan backward means picking
    /// any of these.
    fn co_transitions(&self) -> Vec<Vec<(u8, u8)>> {
        let mut co = vec![Vec::new(); self.delta.len()];
        for (source, row) in self.delta.iter().enumerate() {
            for (bit, &target) in row.iter().enumerate() {
                co[target as usize].push((source as u8, bit as u8));
            }
        }
        co
    }
}

/// Keeps one representative per scanner shape: every state reachable
/// from 0, numbered in discovery order (edges scanned bit 0 then bit 1).
fn scanner_is_canonical(delta: &[[u8; 2]]) -> bool {
    let mut seen = 1;
    let mut cursor = 0;
    while cursor < seen {
        for bit in 0..2 {
            let target = delta[cursor][bit] as usize;
            if target == seen {
                seen += 1;
            } else if target > seen {
                return false;
            }
        }
        cursor += 1;
    }
    seen == delta.len()
}

/// Every canonical `states`-state scanner with a blank-absorbing start.
fn scanner_catalog(states: u8) -> Vec<ScanDfa> {
    let k = states as usize;
    // All table slots except the pinned delta[0][0] = 0.
    let slots = 2 * k - 1;
    let mut digits = vec![0u8; slots];
    let mut out = Vec::new();
    loop {
        let mut delta = vec![[0u8; 2]; k];
        delta[0][1] = digits[0];
        for s in 1..k {
            delta[s] = [digits[2 * s - 1], digits[2 * s]];
        }
        if scanner_is_canonical(&delta) {
            out.push(ScanDfa { delta });
        }
        let mut carry = slots;
        for (i, digit) in digits.iter_mut().enumerate() {
            if *digit as usize + 1 < k {
                *digit += 1;
                carry = i;
                break;
            }
            *digit = 0;
        }
        if carry == slots {
            return out;
        }
    }
}

/// Checks one scanner pair: `left` reads the half-tape strictly left of
/// the head outward-in (far cells first), `right` reads the cells
/// strictly right of the head inward from the far end. An abstract
/// configuration is (left scan state, machine state, head bit, right
/// scan state); there are finitely many. Stepping is exact on the head
/// bit and the write, and runs the scanners backward (over their
/// incoming edges) for the cell the head moves onto, which
/// over-approximates: every concrete configuration maps into some
/// abstract one, and every concrete step lands inside some abstract
/// successor. A closed, halt-free exploration therefore proves the
/// machine never halts, no matter how the scanners were chosen; the
/// choice only affects whether the closure succeeds.
fn automaton_closure_proves(m: &ClassicalMachine, left: &ScanDfa, right: &ScanDfa) -> bool {
    let nq = m.n_states();
    let ne = right.delta.len();
    let co_left = left.co_transitions();
    let co_right = right.co_transitions();
    let index =
        |d: u8, q: u8, b: u8, e: u8| ((d as usize * nq + q as usize) * 2 + b as usize) * ne + e as usize;
    let mut visited = vec![false; left.delta.len() * nq * 2 * ne];
    visited[index(0, 0, 0, 0)] = true;
    let mut queue = vec![(0u8, 0u8, 0u8, 0u8)];
    while let Some((d, q, b, e)) = queue.pop() {
        let action = m.action(q, b);
        let ClassicalTarget::State(next) = action.next else {
            return false;
        };
        match action.dir {
            Dir::R => {
                // The written cell joins the left side; the head lands on
                // the first cell of the old right side, so its bit and
                // the remaining scan state come from an incoming edge.
                let d2 = left.delta[d as usize][action.write as usize];
                for &(e2, b2) in &co_right[e as usize] {
                    if !visited[index(d2, next, b2, e2)] {
                        visited[index(d2, next, b2, e2)] = true;
                        queue.push((d2, next, b2, e2));
                    }
                }
            }
            Dir::L => {
                // Mirror image: the written cell joins the right side
                // (scanned inward, so it is the last bit read) and the
                // head lands on the nearest cell of the left side.
                let e2 = right.delta[e as usize][action.write as usize];
                for &(d2, b2) in &co_left[d as usize] {
                    if !visited[index(d2, next, b2, e2)] {
                        visited[index(d2, next, b2, e2)] = true;
                        queue.push((d2, next, b2, e2));
                    }
                }
            }
        }
    }
    true
}

/// Tries scanner pairs small-first until one closes halt-free or the
/// budget runs out. Returns the successful pair's sizes.
fn automaton_stage(m: &ClassicalMachine, budget: &DeciderBudget) -> Option<(u8, u8)> {
    if budget.automata_states == 0 || budget.automata_pairs == 0 {
        return None;
    }
    let cap = budget.automata_states;
    let catalogs: Vec<Vec<ScanDfa>> = (1..=cap).map(scanner_catalog).collect();
    let mut sizes: Vec<(u8, u8)> = (1..=cap).flat_map(|i| (1..=cap).map(move |j| (i, j))).collect();
    sizes.sort_by_key(|&(i, j)| (i + j, i.max(j), i));
    let mut pairs_left = budget.automata_pairs;
    for (i, j) in sizes {
        for left in &catalogs[i as usize - 1] {
            for right in &catalogs[j as usize - 1] {
                if pairs_left == 0 {
                    return None;
                }
                pairs_left -= 1;
                if automaton_closure_proves(m, left, right) {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

/// Full pipeline: static reachability of the halt entries, forward
/// simulation with cycle and translated-cycle detection, backward
/// refutation, the saturated-run closure, and finally the automaton
/// closure for whatever survives.
pub fn decide_classical(m: &ClassicalMachine, budget: &DeciderBudget) -> ClassicalVerdict {
    if !m.has_halt_entry() {
        return ClassicalVerdict::NonHalting(NonHaltProof::NoHaltEntries);
    }
    let reach = graph_reachable(m);
    let live_halt = m.rows().iter().enumerate().any(|(q, row)| {
        reach[q] && row.iter().any(|action| action.next == ClassicalTarget::Halt)
    });
    if !live_halt {
        return ClassicalVerdict::NonHalting(NonHaltProof::DeadHaltEntries);
    }
    let verdict = forward_stage(m, budget);
    if verdict.is_decided() {
        return verdict;
    }
    if let Some(depth) = backward_stage(m, budget) {
        return ClassicalVerdict::NonHalting(NonHaltProof::HaltUnreachable { depth });
    }
    if let Some(configs) = closure_stage(m, budget) {
        return ClassicalVerdict::NonHalting(NonHaltProof::AbstractClosure { configs });
    }
    match automaton_stage(m, budget) {
        Some((left_states, right_states)) => {
            ClassicalVerdict::NonHalting(NonHaltProof::AutomatonClosure {
                left_states,
                right_states,
            })
        }
        None => ClassicalVerdict::Undecided,
    }
}
