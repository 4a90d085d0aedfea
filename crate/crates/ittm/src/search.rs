//! Champion searches over machine spaces.
//!
//! Enumeration is simulation-driven: a table starts empty and entries are
//! assigned the moment the blank-tape run first needs them, with fresh
//! states numbered in order of first reference. Branches whose run halts,
//! or is certified non-halting by the inline detectors, end at that point
//! and the table is completed with a canonical filler for the entries the
//! run never touched; the filler cannot matter, because the run provably
//! never reaches it. Classical branches that exhaust the enumeration step
//! cap undecided instead emit every completion of the untouched entries,
//! so the stream still covers every blank-tape behavior that reveals
//! itself within the cap. For classical machines the first executed move
//! is fixed rightward, which drops mirror images; scores, steps, and
//! cleanliness are mirror-invariant.
//!
//! Searches then decide every enumerated machine and aggregate: the value
//! is the maximum over resolved halting machines, the champion the
//! lexicographically least encoding attaining it, and the report is
//! `Exact` only when nothing stayed unresolved, otherwise it is honestly
//! a `LowerBound`. Aggregation is associative and commutative, so worker
//! count cannot change a report. Transfinite enumeration makes no
//! coverage claim and its searches never report `Exact`: its per-machine
//! runs are budget-capped, and the space is explored only up to a small
//! state ceiling.

use std::collections::HashMap;
use std::io;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::classical::{
    is_clean_output, run_classical, score_rado, ClassicalAction, ClassicalConfig, ClassicalMachine,
    ClassicalRun, ClassicalTarget, CleanOutcome, Dir, FiniteTapeWindow,
};
use crate::decider::{decide_classical, ClassicalVerdict, DeciderBudget, NonHaltProof, PatternWatcher};
use crate::exec::{
    omega_limit, run_transfinite, BlockScanner, ExecBudget, PatternDetection, PatternReport,
    RunOutcome,
};
use crate::format::decode_ittm;
use crate::ittm::{
    active_row, apply_action, triple_from_index, triple_index, ITTMachine, IttmAction, IttmTarget,
    LimitRule, MachineState, OrdinalStage, RowId, Snapshot, StepOutcome, TapeId, Triple,
};
use crate::ledger::{Ledger, LedgerRecord, SCHEMA_VERSION};
use crate::tape::EPTape;

/// Steps a classical enumeration branch may run before the branch is cut
/// as undecided and completed exhaustively.
const CLASSICAL_ENUM_STEP_CAP: u64 = 20_000;
/// Steps during which the inline detectors keep record snapshots.
const CLASSICAL_ENUM_PATTERN_STEPS: u64 = 2_000;

/// Largest `n` for which the transfinite table space is enumerated at all.
pub const ITTM_ENUM_CEILING: usize = 2;

/// Hard cap on tables emitted per transfinite enumeration call. Even
/// inside the ceiling the reachable tree is enormous (three tapes make
/// for 24 and more candidates per entry), so the stream is an explicitly
/// deterministic prefix: depth-first, halting completions ahead of their
/// sibling subtrees at every branch. Searches over a cut-short stream
/// stay honest because they never claim more than a lower bound.
pub const ITTM_ENUM_EMISSION_CAP: u64 = 40_000;

/// Per-branch budget of the transfinite enumerator. One limit stage is
/// enough to reach the limit row and to certify simple recurrence at the
/// second limit; everything longer-lived ends its branch undecided.
const ITTM_ENUM_BUDGET: ExecBudget = ExecBudget {
    max_block_steps: 128,
    max_limit_stages: 1,
    detection: PatternDetection::CycleAndDrift,
};

/// Pushes between drift probes while enumerating; a final probe at block
/// end catches what the thinning skipped.
const ITTM_ENUM_DRIFT_INTERVAL: usize = 32;

/// How a halting machine's final tape is scored.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScoreConvention {
    /// Count every 1 left on the tape.
    RadoCount,
    /// Count the ones only when the tape reads `1^k 0^ω` from the leftmost
    /// visited cell; anything else contributes nothing.
    CleanTape,
}

impl ScoreConvention {
    pub fn name(self) -> &'static str {
        match self {
            ScoreConvention::RadoCount => "rado",
            ScoreConvention::CleanTape => "clean",
        }
    }
}

/// What a search maximizes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchMeasure {
    Score(ScoreConvention),
    Steps,
}

impl SearchMeasure {
    pub fn name(self) -> &'static str {
        match self {
            SearchMeasure::Score(c) => c.name(),
            SearchMeasure::Steps => "steps",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchStatus {
    /// Every enumerated machine was resolved; the value is the true
    /// maximum over the enumerated space.
    Exact,
    /// Some machines stayed unresolved (or the space itself was explored
    /// under budgets that forbid the claim); the true value is at least
    /// this one.
    LowerBound,
}

/// Outcome of a champion search.
#[derive(Clone, PartialEq, Debug)]
pub struct SearchReport {
    pub n: usize,
    pub measure: SearchMeasure,
    pub value: u64,
    pub status: SearchStatus,
    /// Compact encoding of the lexicographically least machine attaining
    /// the value; `None` when nothing halted.
    pub champion: Option<String>,
    /// Replayable proof of the champion's claim.
    pub certificate: Option<Certificate>,
    pub total: u64,
    pub unresolved: u64,
    pub budgets: DeciderBudget,
}

/// Default per-machine budgets for the classical search at a given size.
/// Small spaces afford generous forward budgets; at `n = 4` the search is
/// a lower-bound scan, so the budget stays modest.
pub fn classical_budget_for(n: usize) -> DeciderBudget {
    let forward_steps: u64 = match n {
        0 | 1 => 100,
        2 => 10_000,
        3 => 100_000,
        _ => 2_000,
    };
    DeciderBudget {
        forward_steps,
        pattern_steps: forward_steps.min(2_000),
        // The big spaces are lower-bound scans; spending closure and
        // automaton effort there buys nothing a scan can claim.
        closure_configs: if n <= 3 { 50_000 } else { 2_000 },
        automata_states: if n <= 3 { 4 } else { 0 },
        automata_pairs: if n <= 3 { 200_000 } else { 0 },
        ..DeciderBudget::default()
    }
}

// ---------------------------------------------------------------------
// Classical enumeration
// ---------------------------------------------------------------------

#[derive(Clone)]
struct PartialClassical {
    rows: Vec<[Option<ClassicalAction>; 2]>,
    /// States `0..introduced` have been referenced; `introduced` is the
    /// next fresh index.
    introduced: u8,
}

enum PartialStep {
    Need(u8, u8),
    Continue,
    Halted,
}

/// One step over a partially assigned table; mirrors the complete-table
/// stepper exactly (a unit test pins the two together).
fn step_partial_classical(
    rows: &[[Option<ClassicalAction>; 2]],
    config: &mut ClassicalConfig,
) -> PartialStep {
    let bit = config.tape.get(config.head);
    let Some(action) = rows[config.state as usize][bit as usize] else {
        return PartialStep::Need(config.state, bit);
    };
    config.tape.set(config.head, action.write);
    config.head += action.dir.delta();
    config.tape.ensure(config.head);
    match action.next {
        ClassicalTarget::State(s) => {
            config.state = s;
            PartialStep::Continue
        }
        ClassicalTarget::Halt => PartialStep::Halted,
    }
}

/// Canonical filler for entries the blank-tape run never reached: write
/// the bit back, move right, stay in the same state. It never halts, so
/// it adds no halting behavior.
fn classical_filler(state: usize, bit: usize) -> ClassicalAction {
    ClassicalAction { write: bit as u8, dir: Dir::R, next: ClassicalTarget::State(state as u8) }
}

fn complete_with_filler(node: &PartialClassical) -> ClassicalMachine {
    let rows = node
        .rows
        .iter()
        .enumerate()
        .map(|(s, row)| {
            [
                row[0].unwrap_or_else(|| classical_filler(s, 0)),
                row[1].unwrap_or_else(|| classical_filler(s, 1)),
            ]
        })
        .collect();
    ClassicalMachine::new(rows)
}

fn push_classical_children(
    node: &PartialClassical,
    state: u8,
    bit: u8,
    first_execution: bool,
    n: usize,
    stack: &mut Vec<PartialClassical>,
) {
    // The first executed move is pinned rightward: the leftward twin is
    // the mirror image of some rightward machine.
    let dirs: &[Dir] = if first_execution { &[Dir::R] } else { &[Dir::L, Dir::R] };
    let fresh_cap = (node.introduced as usize).min(n - 1) as u8;
    let mut child = |action: ClassicalAction| {
        let mut next = node.clone();
        next.rows[state as usize][bit as usize] = Some(action);
        if let ClassicalTarget::State(t) = action.next {
            next.introduced = next.introduced.max(t + 1);
        }
        stack.push(next);
    };
    for write in [0, 1] {
        for &dir in dirs {
            for target in 0..=fresh_cap {
                child(ClassicalAction { write, dir, next: ClassicalTarget::State(target) });
            }
        }
        // Halting moves are canonicalized to R; the move affects only the
        // final head position, never tape, steps, or score.
        child(ClassicalAction { write, dir: Dir::R, next: ClassicalTarget::Halt });
    }
}

/// Emits every completion of the entries an undecided capped run never
/// touched, with fresh states still introduced in first-reference order.
fn emit_completions(node: &PartialClassical, n: usize, out: &mut dyn FnMut(ClassicalMachine)) {
    let unassigned: Vec<(usize, usize)> = (0..n)
        .flat_map(|q| (0..2).map(move |b| (q, b)))
        .filter(|&(q, b)| node.rows[q][b].is_none())
        .collect();
    if unassigned.is_empty() {
        out(complete_with_filler(node));
        return;
    }
    fn recurse(
        rows: &mut Vec<[Option<ClassicalAction>; 2]>,
        introduced: u8,
        unassigned: &[(usize, usize)],
        n: usize,
        out: &mut dyn FnMut(ClassicalMachine),
    ) {
        let Some(&(q, b)) = unassigned.first() else {
            let complete = rows
                .iter()
                .map(|row| [row[0].unwrap(), row[1].unwrap()])
                .collect();
            out(ClassicalMachine::new(complete));
            return;
        };
        let fresh_cap = (introduced as usize).min(n - 1) as u8;
        for write in [0, 1] {
            for dir in [Dir::L, Dir::R] {
                for target in 0..=fresh_cap {
                    rows[q][b] =
                        Some(ClassicalAction { write, dir, next: ClassicalTarget::State(target) });
                    recurse(rows, introduced.max(target + 1), &unassigned[1..], n, out);
                }
            }
            rows[q][b] =
                Some(ClassicalAction { write, dir: Dir::R, next: ClassicalTarget::Halt });
            recurse(rows, introduced, &unassigned[1..], n, out);
        }
        rows[q][b] = None;
    }
    recurse(&mut node.rows.clone(), node.introduced, &unassigned, n, out);
}

/// Walks one enumeration branch: replay the blank-tape run over the
/// partial table until it needs an entry (branch), halts, is cut by the
/// inline detectors, or hits the cap.
fn expand_classical(
    node: PartialClassical,
    n: usize,
    stack: &mut Vec<PartialClassical>,
    out: &mut dyn FnMut(ClassicalMachine),
) {
    let mut config = ClassicalConfig::blank();
    let mut watcher = PatternWatcher::new(&config, CLASSICAL_ENUM_PATTERN_STEPS);
    let mut steps: u64 = 0;
    loop {
        if steps == CLASSICAL_ENUM_STEP_CAP {
            emit_completions(&node, n, out);
            return;
        }
        match step_partial_classical(&node.rows, &mut config) {
            PartialStep::Need(state, bit) => {
                push_classical_children(&node, state, bit, steps == 0, n, stack);
                return;
            }
            PartialStep::Halted => {
                out(complete_with_filler(&node));
                return;
            }
            PartialStep::Continue => {
                steps += 1;
                if watcher.observe(steps, &config).is_some() {
                    out(complete_with_filler(&node));
                    return;
                }
            }
        }
    }
}

/// Streams the normalized `n`-state classical table space in a fixed,
/// deterministic order.
pub fn enumerate_classical_with(n: usize, mut f: impl FnMut(ClassicalMachine)) {
    assert!(n >= 1, "a machine needs at least one state");
    assert!(n <= crate::classical::MAX_NAMED_STATES);
    let mut stack = vec![PartialClassical { rows: vec![[None; 2]; n], introduced: 1 }];
    while let Some(node) = stack.pop() {
        expand_classical(node, n, &mut stack, &mut f);
    }
}

/// [`enumerate_classical_with`], collected.
pub fn enumerate_classical(n: usize) -> Vec<ClassicalMachine> {
    let mut out = Vec::new();
    enumerate_classical_with(n, |m| out.push(m));
    out
}

// ---------------------------------------------------------------------
// Classical search
// ---------------------------------------------------------------------

/// Budget fingerprint used in ledger keys and certificates.
pub fn fingerprint_classical(b: &DeciderBudget) -> String {
    format!(
        "f{},p{},bd{},bn{},cc{},as{},ap{}",
        b.forward_steps,
        b.pattern_steps,
        b.backward_depth,
        b.backward_nodes,
        b.closure_configs,
        b.automata_states,
        b.automata_pairs
    )
}

/// Budget fingerprint for transfinite value runs at a given input.
pub fn fingerprint_fstar(b: &ExecBudget, rule: LimitRule, input: u64) -> String {
    let detection = match b.detection {
        PatternDetection::CycleAndDrift => "cycle+drift",
        PatternDetection::CycleOnly => "cycle",
    };
    format!(
        "bs{},ml{},det={detection},rule={},in{input}",
        b.max_block_steps,
        b.max_limit_stages,
        rule.name(),
    )
}

enum Resolution {
    Scored(u64),
    Resolved,
    Unresolved,
}

#[derive(Clone, Default, PartialEq, Debug)]
struct Tally {
    total: u64,
    unresolved: u64,
    best: Option<(u64, String)>,
}

impl Tally {
    fn one(encoding: &str, resolution: Resolution) -> Tally {
        let mut tally = Tally { total: 1, ..Tally::default() };
        match resolution {
            Resolution::Scored(value) => tally.best = Some((value, encoding.to_string())),
            Resolution::Resolved => {}
            Resolution::Unresolved => tally.unresolved = 1,
        }
        tally
    }

    /// Associative and commutative, so parallel reduction order cannot
    /// change the result: larger value wins, ties go to the smaller
    /// encoding.
    fn merge(self, other: Tally) -> Tally {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => {
                Some(if (b.0, &a.1) > (a.0, &b.1) { b } else { a })
            }
            (a, b) => a.or(b),
        };
        Tally {
            total: self.total + other.total,
            unresolved: self.unresolved + other.unresolved,
            best,
        }
    }
}

fn classical_score(tape: &FiniteTapeWindow, convention: ScoreConvention) -> Option<u64> {
    match convention {
        ScoreConvention::RadoCount => Some(score_rado(tape)),
        ScoreConvention::CleanTape => match is_clean_output(tape) {
            CleanOutcome::Clean(k) => Some(k),
            CleanOutcome::NotClean => None,
        },
    }
}

fn verdict_to_fields(
    verdict: &ClassicalVerdict,
    measure: SearchMeasure,
) -> (String, Option<String>, Option<u64>) {
    match verdict {
        ClassicalVerdict::Halted { steps, tape } => {
            let score = match measure {
                SearchMeasure::Score(c) => classical_score(tape, c),
                SearchMeasure::Steps => Some(*steps),
            };
            ("halted".into(), Some(OrdinalStage::new(0, *steps).to_string()), score)
        }
        ClassicalVerdict::NonHalting(proof) => {
            let tag = match proof {
                NonHaltProof::NoHaltEntries => "no-halt-entries",
                NonHaltProof::ExactCycle { .. } => "exact-cycle",
                NonHaltProof::TranslatedCycle { .. } => "translated-cycle",
                NonHaltProof::HaltUnreachable { .. } => "halt-unreachable",
                NonHaltProof::DeadHaltEntries => "dead-halt-entries",
                NonHaltProof::AbstractClosure { .. } => "abstract-closure",
                NonHaltProof::AutomatonClosure { .. } => "automaton-closure",
            };
            (format!("non-halting:{tag}"), None, None)
        }
        ClassicalVerdict::Undecided => ("undecided".into(), None, None),
    }
}

fn resolution_from_record(record: &LedgerRecord) -> io::Result<Resolution> {
    if record.outcome == "halted" {
        return Ok(match record.score {
            Some(v) => Resolution::Scored(v),
            None => Resolution::Resolved,
        });
    }
    if record.outcome.starts_with("non-halting:") {
        return Ok(Resolution::Resolved);
    }
    if record.outcome == "undecided" {
        return Ok(Resolution::Unresolved);
    }
    Err(io::Error::new(
        io::ErrorKind::InvalidData,
        format!("ledger outcome {:?} does not belong to a classical search", record.outcome),
    ))
}

/// Decides one machine, consulting and feeding the ledger.
fn resolve_classical(
    m: &ClassicalMachine,
    n: usize,
    measure: SearchMeasure,
    budget: &DeciderBudget,
    fingerprint: &str,
    ledger: Option<&Ledger>,
) -> io::Result<Tally> {
    let encoding = m.encode();
    if let Some(ledger) = ledger {
        if let Some(record) = ledger.lookup("classical", n, measure.name(), &encoding, fingerprint)
        {
            return Ok(Tally::one(&encoding, resolution_from_record(&record)?));
        }
    }
    let verdict = decide_classical(m, budget);
    let (outcome, stage, score) = verdict_to_fields(&verdict, measure);
    if let Some(ledger) = ledger {
        ledger.record(LedgerRecord {
            schema_version: SCHEMA_VERSION,
            kind: "classical".into(),
            n,
            convention: measure.name().into(),
            machine: encoding.clone(),
            outcome,
            stage,
            score,
            budgets: fingerprint.to_string(),
            timestamp: crate::ledger::timestamp_now(),
        })?;
    }
    let resolution = match verdict {
        ClassicalVerdict::Halted { .. } => match score {
            Some(v) => Resolution::Scored(v),
            None => Resolution::Resolved,
        },
        ClassicalVerdict::NonHalting(_) => Resolution::Resolved,
        ClassicalVerdict::Undecided => Resolution::Unresolved,
    };
    Ok(Tally::one(&encoding, resolution))
}

const SEARCH_CHUNK: usize = 4_096;

fn classical_search(
    n: usize,
    measure: SearchMeasure,
    budget: &DeciderBudget,
    ledger: Option<&Ledger>,
) -> io::Result<SearchReport> {
    let fingerprint = fingerprint_classical(budget);
    let mut tally = Tally::default();
    let mut chunk: Vec<ClassicalMachine> = Vec::with_capacity(SEARCH_CHUNK);
    let flush = |chunk: &mut Vec<ClassicalMachine>, tally: &mut Tally| -> io::Result<()> {
        let merged = chunk
            .par_iter()
            .map(|m| resolve_classical(m, n, measure, budget, &fingerprint, ledger))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        *tally = std::mem::take(tally).merge(merged);
        chunk.clear();
        Ok(())
    };
    let mut pending = Ok(());
    enumerate_classical_with(n, |m| {
        if pending.is_err() {
            return;
        }
        chunk.push(m);
        if chunk.len() == SEARCH_CHUNK {
            pending = flush(&mut chunk, &mut tally);
        }
    });
    pending?;
    flush(&mut chunk, &mut tally)?;

    let (value, champion) = match tally.best {
        Some((value, encoding)) => (value, Some(encoding)),
        None => (0, None),
    };
    let certificate = champion
        .as_deref()
        .map(|enc| certify_classical(enc, measure, budget))
        .transpose()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    Ok(SearchReport {
        n,
        measure,
        value,
        status: if tally.unresolved == 0 { SearchStatus::Exact } else { SearchStatus::LowerBound },
        champion,
        certificate,
        total: tally.total,
        unresolved: tally.unresolved,
        budgets: *budget,
    })
}

/// Maximum score over the normalized `n`-state classical space.
pub fn sigma_classical(
    n: usize,
    convention: ScoreConvention,
    budget: &DeciderBudget,
    ledger: Option<&Ledger>,
) -> io::Result<SearchReport> {
    classical_search(n, SearchMeasure::Score(convention), budget, ledger)
}

/// Maximum halting step count over the normalized `n`-state space.
pub fn s_time_classical(
    n: usize,
    budget: &DeciderBudget,
    ledger: Option<&Ledger>,
) -> io::Result<SearchReport> {
    classical_search(n, SearchMeasure::Steps, budget, ledger)
}

// ---------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------

/// A replayable claim: this machine, re-run under these budgets, halts at
/// this stage with this output. Verification re-simulates and compares.
#[derive(Clone, PartialEq, Debug, serde::Serialize, serde::Deserialize)]
pub struct Certificate {
    /// "classical" or "ittm".
    pub kind: String,
    /// Compact machine encoding.
    pub machine: String,
    /// "rado", "clean", "steps", or "f-star".
    pub measure: String,
    /// Input numeral for "f-star" claims.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_n: Option<u64>,
    pub value: u64,
    /// Halting stage, `w*b+c`.
    pub stage: String,
    /// SHA-256 of the canonical final output: `start:bits` of the trimmed
    /// window for classical tapes, the `prefix(period)^w` rendering for
    /// transfinite output tapes.
    pub output_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<String>,
    /// Re-simulation budgets.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub forward_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_block_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_limit_stages: Option<u64>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("machine does not parse: {0}")]
    MachineParse(String),
    #[error("unknown certificate kind {0:?}")]
    UnknownKind(String),
    #[error("unknown measure {0:?}")]
    UnknownMeasure(String),
    #[error("certificate is missing required field {0}")]
    MissingField(&'static str),
    #[error("machine did not halt under the recorded budgets")]
    DidNotHalt,
    #[error("halting stage {found} does not match the claimed {claimed}")]
    WrongStage { claimed: String, found: String },
    #[error("value {found} does not match the claimed {claimed}")]
    WrongValue { claimed: u64, found: u64 },
    #[error("final tape is not clean, so it has no clean score")]
    NotClean,
    #[error("output tape is not a unary numeral")]
    NotUnary,
    #[error("output digest does not match")]
    WrongDigest,
}

fn digest_hex(canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical digest input for a finite two-way tape.
fn canonical_classical_tape(tape: &FiniteTapeWindow) -> String {
    let (start, bits) = tape.trimmed();
    let rendered: String = bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    format!("{start}:{rendered}")
}

pub fn digest_classical_tape(tape: &FiniteTapeWindow) -> String {
    digest_hex(&canonical_classical_tape(tape))
}

pub fn digest_ep_tape(tape: &EPTape) -> String {
    digest_hex(&tape.to_string())
}

/// Builds the certificate for a classical champion by re-running it.
fn certify_classical(
    encoding: &str,
    measure: SearchMeasure,
    budget: &DeciderBudget,
) -> Result<Certificate, CertificateError> {
    let machine: ClassicalMachine =
        encoding.parse().map_err(|e: crate::classical::EncodingError| {
            CertificateError::MachineParse(e.to_string())
        })?;
    let ClassicalRun::Halted { steps, tape } = run_classical(&machine, budget.forward_steps) else {
        return Err(CertificateError::DidNotHalt);
    };
    let value = match measure {
        SearchMeasure::Score(c) => classical_score(&tape, c).ok_or(CertificateError::NotClean)?,
        SearchMeasure::Steps => steps,
    };
    Ok(Certificate {
        kind: "classical".into(),
        machine: encoding.to_string(),
        measure: measure.name().into(),
        input_n: None,
        value,
        stage: OrdinalStage::new(0, steps).to_string(),
        output_digest: digest_classical_tape(&tape),
        rule: None,
        forward_steps: Some(budget.forward_steps),
        max_block_steps: None,
        max_limit_stages: None,
    })
}

/// Builds the certificate for a transfinite value claim by re-running it.
fn certify_fstar(
    encoding: &str,
    input: u64,
    budget: &ExecBudget,
    rule: LimitRule,
) -> Result<Certificate, CertificateError> {
    let machine =
        decode_ittm(encoding).map_err(|e| CertificateError::MachineParse(e.to_string()))?;
    let RunOutcome::Halted { snapshot } =
        run_transfinite(&machine, EPTape::encode_unary(input), budget, rule)
    else {
        return Err(CertificateError::DidNotHalt);
    };
    let output = snapshot.tape(TapeId::Output);
    let value = output.decode_unary().ok_or(CertificateError::NotUnary)?;
    Ok(Certificate {
        kind: "ittm".into(),
        machine: encoding.to_string(),
        measure: "f-star".into(),
        input_n: Some(input),
        value,
        stage: snapshot.stage.to_string(),
        output_digest: digest_ep_tape(output),
        rule: Some(rule.name().into()),
        forward_steps: None,
        max_block_steps: Some(budget.max_block_steps),
        max_limit_stages: Some(budget.max_limit_stages),
    })
}

/// Re-simulates a certificate's machine under its recorded budgets and
/// checks the claimed stage, value, and output digest.
pub fn verify_certificate(cert: &Certificate) -> Result<(), CertificateError> {
    match cert.kind.as_str() {
        "classical" => {
            let machine: ClassicalMachine = cert.machine.parse().map_err(
                |e: crate::classical::EncodingError| CertificateError::MachineParse(e.to_string()),
            )?;
            let forward =
                cert.forward_steps.ok_or(CertificateError::MissingField("forward_steps"))?;
            let ClassicalRun::Halted { steps, tape } = run_classical(&machine, forward) else {
                return Err(CertificateError::DidNotHalt);
            };
            let found_stage = OrdinalStage::new(0, steps).to_string();
            if found_stage != cert.stage {
                return Err(CertificateError::WrongStage {
                    claimed: cert.stage.clone(),
                    found: found_stage,
                });
            }
            let found = match cert.measure.as_str() {
                "rado" => classical_score(&tape, ScoreConvention::RadoCount).unwrap(),
                "clean" => classical_score(&tape, ScoreConvention::CleanTape)
                    .ok_or(CertificateError::NotClean)?,
                "steps" => steps,
                other => return Err(CertificateError::UnknownMeasure(other.to_string())),
            };
            if found != cert.value {
                return Err(CertificateError::WrongValue { claimed: cert.value, found });
            }
            if digest_classical_tape(&tape) != cert.output_digest {
                return Err(CertificateError::WrongDigest);
            }
            Ok(())
        }
        "ittm" => {
            if cert.measure != "f-star" {
                return Err(CertificateError::UnknownMeasure(cert.measure.clone()));
            }
            let machine = decode_ittm(&cert.machine)
                .map_err(|e| CertificateError::MachineParse(e.to_string()))?;
            let input = cert.input_n.ok_or(CertificateError::MissingField("input_n"))?;
            let budget = ExecBudget {
                max_block_steps: cert
                    .max_block_steps
                    .ok_or(CertificateError::MissingField("max_block_steps"))?,
                max_limit_stages: cert
                    .max_limit_stages
                    .ok_or(CertificateError::MissingField("max_limit_stages"))?,
                detection: PatternDetection::CycleAndDrift,
            };
            let rule = match cert.rule.as_deref() {
                Some("limsup") => LimitRule::Limsup,
                Some("liminf") => LimitRule::Liminf,
                _ => return Err(CertificateError::MissingField("rule")),
            };
            let RunOutcome::Halted { snapshot } =
                run_transfinite(&machine, EPTape::encode_unary(input), &budget, rule)
            else {
                return Err(CertificateError::DidNotHalt);
            };
            let found_stage = snapshot.stage.to_string();
            if found_stage != cert.stage {
                return Err(CertificateError::WrongStage {
                    claimed: cert.stage.clone(),
                    found: found_stage,
                });
            }
            let output = snapshot.tape(TapeId::Output);
            let found = output.decode_unary().ok_or(CertificateError::NotUnary)?;
            if found != cert.value {
                return Err(CertificateError::WrongValue { claimed: cert.value, found });
            }
            if digest_ep_tape(output) != cert.output_digest {
                return Err(CertificateError::WrongDigest);
            }
            Ok(())
        }
        other => Err(CertificateError::UnknownKind(other.to_string())),
    }
}

// ---------------------------------------------------------------------
// Transfinite enumeration
// ---------------------------------------------------------------------

/// Refusal to enumerate a transfinite table space beyond the ceiling.
#[derive(Clone, PartialEq, Debug, thiserror::Error)]
#[error(
    "refusing to enumerate the {n}-state transfinite table space: roughly 10^{estimate_log10:.0} raw tables (ceiling is n = {ceiling})"
)]
pub struct EnumerationRefused {
    pub n: usize,
    pub ceiling: usize,
    pub estimate_log10: f64,
}

/// log10 of the raw table count: `8(n+1)` entries, each with 8 writes, 2
/// moves, and `n + 1` targets.
fn ittm_space_log10(n: usize) -> f64 {
    let entries = 8.0 * (n as f64 + 1.0);
    entries * (16.0 * (n as f64 + 1.0)).log10()
}

#[derive(Clone)]
struct PartialIttm {
    rows: Vec<[Option<IttmAction>; 8]>,
    limit_row: [Option<IttmAction>; 8],
    introduced: u16,
}

impl PartialIttm {
    fn entry(&self, row: RowId, triple: Triple) -> Option<IttmAction> {
        match row {
            RowId::State(s) => self.rows[s as usize][triple_index(triple)],
            RowId::Limit => self.limit_row[triple_index(triple)],
        }
    }

    fn set(&mut self, row: RowId, triple: Triple, action: IttmAction) {
        let slot = match row {
            RowId::State(s) => &mut self.rows[s as usize][triple_index(triple)],
            RowId::Limit => &mut self.limit_row[triple_index(triple)],
        };
        *slot = Some(action);
        if let IttmTarget::State(t) = action.next {
            self.introduced = self.introduced.max(t + 1);
        }
    }

    fn complete_with_filler(&self) -> ITTMachine {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                std::array::from_fn(|i| {
                    row[i].unwrap_or(IttmAction {
                        write: triple_from_index(i),
                        dir: Dir::R,
                        next: IttmTarget::State(s as u16),
                    })
                })
            })
            .collect();
        let limit_row = std::array::from_fn(|i| {
            self.limit_row[i].unwrap_or(IttmAction {
                write: triple_from_index(i),
                dir: Dir::R,
                next: IttmTarget::State(0),
            })
        });
        ITTMachine::new(rows, limit_row)
    }
}

enum IttmRunEvent {
    Need(RowId, Triple),
    Finished,
}

/// Replays a branch's blank-tape transfinite run over the partial table
/// until it needs an entry or finishes (halt, certificate, or budget).
fn run_partial_ittm(p: &PartialIttm, rule: LimitRule) -> IttmRunEvent {
    let budget = &ITTM_ENUM_BUDGET;
    let mut limit_seen: HashMap<([EPTape; 3], usize, MachineState), ()> = HashMap::new();
    let mut current = Snapshot::initial(EPTape::blank());
    loop {
        let mut scanner =
            BlockScanner::with_drift_interval(current, budget.detection, ITTM_ENUM_DRIFT_INTERVAL);
        let mut pattern: Option<PatternReport> = None;
        for _ in 0..budget.max_block_steps {
            let snap = scanner.last();
            let row = active_row(snap).expect("a finished branch never steps again");
            let triple = snap.read_triple();
            let Some(action) = p.entry(row, triple) else {
                return IttmRunEvent::Need(row, triple);
            };
            match apply_action(snap, action) {
                StepOutcome::Halted(_) => return IttmRunEvent::Finished,
                StepOutcome::Continue(next) => {
                    if let Some(report) = scanner.push(next) {
                        pattern = Some(report);
                        break;
                    }
                }
            }
        }
        let pattern = pattern.or_else(|| scanner.probe_drift());
        let Some(report) = pattern else {
            // Block budget exhausted: the branch ends undecided.
            return IttmRunEvent::Finished;
        };
        let limit = omega_limit(&report, scanner.history(), rule)
            .expect("a detected pattern always re-verifies");
        let config = limit.snapshot.configuration();
        if limit_seen.contains_key(&config) {
            // Recurring limit configuration: certified non-halting.
            return IttmRunEvent::Finished;
        }
        if limit.snapshot.stage.limits > budget.max_limit_stages {
            return IttmRunEvent::Finished;
        }
        limit_seen.insert(config, ());
        current = limit.snapshot;
    }
}

/// Pushed in reverse visit order, halting candidates last, so the stack
/// pops every halting completion of this entry before descending into
/// any sibling subtree. Under the emission cap that keeps the stream
/// prefix rich in halting machines.
fn push_ittm_children(
    node: &PartialIttm,
    row: RowId,
    triple: Triple,
    n: usize,
    stack: &mut Vec<PartialIttm>,
) {
    let fresh_cap = (node.introduced as usize).min(n - 1) as u16;
    for write_index in (0..8).rev() {
        let write = triple_from_index(write_index);
        for dir in [Dir::R, Dir::L] {
            for target in (0..=fresh_cap).rev() {
                let mut child = node.clone();
                child.set(row, triple, IttmAction { write, dir, next: IttmTarget::State(target) });
                stack.push(child);
            }
        }
    }
    // Halting moves canonicalized to R, as in the classical stream.
    for write_index in (0..8).rev() {
        let mut child = node.clone();
        child.set(
            row,
            triple,
            IttmAction { write: triple_from_index(write_index), dir: Dir::R, next: IttmTarget::Halt },
        );
        stack.push(child);
    }
}

/// How far a transfinite enumeration got before returning.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IttmStreamStats {
    pub emitted: u64,
    /// True when the emission cap cut the stream short of the full tree.
    pub truncated: bool,
}

/// Streams a deterministic prefix of the normalized `n`-state transfinite
/// table space under the given limit rule (the rule shapes limit-stage
/// reads, so it shapes which entries the runs visit). Branch runs are
/// budget-capped and the stream stops at [`ITTM_ENUM_EMISSION_CAP`]
/// tables, so it makes no behavior-coverage claim; searches over it stay
/// lower bounds.
pub fn enumerate_ittm_with(
    n: usize,
    rule: LimitRule,
    mut f: impl FnMut(ITTMachine),
) -> Result<IttmStreamStats, EnumerationRefused> {
    assert!(n >= 1, "a machine needs at least one ordinary state");
    if n > ITTM_ENUM_CEILING {
        return Err(EnumerationRefused {
            n,
            ceiling: ITTM_ENUM_CEILING,
            estimate_log10: ittm_space_log10(n),
        });
    }
    let mut stack = vec![PartialIttm {
        rows: vec![[None; 8]; n],
        limit_row: [None; 8],
        introduced: 1,
    }];
    let mut stats = IttmStreamStats { emitted: 0, truncated: false };
    while let Some(node) = stack.pop() {
        if stats.emitted == ITTM_ENUM_EMISSION_CAP {
            stats.truncated = true;
            return Ok(stats);
        }
        match run_partial_ittm(&node, rule) {
            IttmRunEvent::Need(row, triple) => push_ittm_children(&node, row, triple, n, &mut stack),
            IttmRunEvent::Finished => {
                f(node.complete_with_filler());
                stats.emitted += 1;
            }
        }
    }
    Ok(stats)
}

/// [`enumerate_ittm_with`], collected.
pub fn enumerate_ittm(n: usize, rule: LimitRule) -> Result<Vec<ITTMachine>, EnumerationRefused> {
    let mut out = Vec::new();
    enumerate_ittm_with(n, rule, |m| out.push(m))?;
    Ok(out)
}

// ---------------------------------------------------------------------
// Transfinite champion search
// ---------------------------------------------------------------------

/// Outcome of the transfinite value search. Always a lower bound: the
/// enumeration is budget-capped and claims no coverage.
#[derive(Clone, PartialEq, Debug)]
pub struct SigmaInfReport {
    pub n: usize,
    pub value: u64,
    pub status: SearchStatus,
    pub champion: Option<String>,
    pub certificate: Option<Certificate>,
    pub total: u64,
    pub unresolved: u64,
    /// True when the enumeration cap cut the stream short, in which case
    /// the bound is over the emitted prefix.
    pub truncated: bool,
    pub rule: LimitRule,
    pub budget: ExecBudget,
}

#[derive(Debug, thiserror::Error)]
pub enum SigmaInfError {
    #[error(transparent)]
    Refused(#[from] EnumerationRefused),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn resolve_fstar(
    m: &ITTMachine,
    n: usize,
    budget: &ExecBudget,
    rule: LimitRule,
    fingerprint: &str,
    ledger: Option<&Ledger>,
) -> io::Result<Tally> {
    let encoding = m.encode();
    if let Some(ledger) = ledger {
        if let Some(record) = ledger.lookup("ittm", n, "f-star", &encoding, fingerprint) {
            let resolution = match record.outcome.as_str() {
                "value" => match record.score {
                    Some(v) => Resolution::Scored(v),
                    None => {
                        return Err(io::Error::new(
                            io::ErrorKind::InvalidData,
                            "ledger value record without a score",
                        ))
                    }
                },
                "diverges" | "not-unary" => Resolution::Resolved,
                other if other.starts_with("undetermined:") => Resolution::Unresolved,
                other => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("ledger outcome {other:?} does not belong to a value search"),
                    ))
                }
            };
            return Ok(Tally::one(&encoding, resolution));
        }
    }
    let outcome = run_transfinite(m, EPTape::encode_unary(0), budget, rule);
    let (resolution, outcome_str, stage, score) = match &outcome {
        RunOutcome::Halted { snapshot } => {
            match snapshot.tape(TapeId::Output).decode_unary() {
                Some(v) => (
                    Resolution::Scored(v),
                    "value".to_string(),
                    Some(snapshot.stage.to_string()),
                    Some(v),
                ),
                None => (
                    Resolution::Resolved,
                    "not-unary".to_string(),
                    Some(snapshot.stage.to_string()),
                    None,
                ),
            }
        }
        RunOutcome::NonHaltingCertified { witness } => (
            Resolution::Resolved,
            "diverges".to_string(),
            Some(witness.second.stage.to_string()),
            None,
        ),
        RunOutcome::Undetermined { reason, stage } => (
            Resolution::Unresolved,
            format!("undetermined:{reason}"),
            Some(stage.to_string()),
            None,
        ),
    };
    if let Some(ledger) = ledger {
        ledger.record(LedgerRecord {
            schema_version: SCHEMA_VERSION,
            kind: "ittm".into(),
            n,
            convention: "f-star".into(),
            machine: encoding.clone(),
            outcome: outcome_str,
            stage,
            score,
            budgets: fingerprint.to_string(),
            timestamp: crate::ledger::timestamp_now(),
        })?;
    }
    Ok(Tally::one(&encoding, resolution))
}

/// Lower bound for the transfinite analog of the score function: the
/// largest value any enumerated `n`-state machine provably computes on
/// input 0 within the budget. The champion carries a replayable
/// certificate.
pub fn sigma_inf_lower_bound(
    n: usize,
    budget: &ExecBudget,
    rule: LimitRule,
    ledger: Option<&Ledger>,
) -> Result<SigmaInfReport, SigmaInfError> {
    let fingerprint = fingerprint_fstar(budget, rule, 0);
    let mut tally = Tally::default();
    let mut chunk: Vec<ITTMachine> = Vec::with_capacity(SEARCH_CHUNK);
    let mut pending: io::Result<()> = Ok(());
    let flush = |chunk: &mut Vec<ITTMachine>, tally: &mut Tally| -> io::Result<()> {
        let merged = chunk
            .par_iter()
            .map(|m| resolve_fstar(m, n, budget, rule, &fingerprint, ledger))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        *tally = std::mem::take(tally).merge(merged);
        chunk.clear();
        Ok(())
    };
    let stats = enumerate_ittm_with(n, rule, |m| {
        if pending.is_err() {
            return;
        }
        chunk.push(m);
        if chunk.len() == SEARCH_CHUNK {
            pending = flush(&mut chunk, &mut tally);
        }
    })?;
    pending.map_err(SigmaInfError::Io)?;
    flush(&mut chunk, &mut tally).map_err(SigmaInfError::Io)?;

    let (value, champion) = match tally.best {
        Some((value, encoding)) => (value, Some(encoding)),
        None => (0, None),
    };
    let certificate = champion
        .as_deref()
        .map(|enc| certify_fstar(enc, 0, budget, rule))
        .transpose()
        .map_err(|e| {
            SigmaInfError::Io(io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
        })?;
    Ok(SigmaInfReport {
        n,
        value,
        status: SearchStatus::LowerBound,
        champion,
        certificate,
        total: tally.total,
        unresolved: tally.unresolved,
        truncated: stats.truncated,
        rule,
        budget: *budget,
    })
}

/// Transcribes a classical table into a transfinite one acting on the
/// output tape: reads and writes use the output bit, the other tapes are
/// written back unchanged, and the limit row is a canonical filler. The
/// transcription is faithful to the classical run exactly when that run
/// never moves left of its start cell, since the one-way tape pins a left
/// move at cell 0 in place.
pub fn lift_classical(m: &ClassicalMachine) -> ITTMachine {
    ITTMachine::from_fn(m.n_states() as u16, |row, t| match row {
        RowId::State(s) => {
            let a = m.action(s as u8, t[TapeId::Output.index()]);
            IttmAction {
                write: [t[0], a.write, t[2]],
                dir: a.dir,
                next: match a.next {
                    ClassicalTarget::State(x) => IttmTarget::State(x as u16),
                    ClassicalTarget::Halt => IttmTarget::Halt,
                },
            }
        }
        RowId::Limit => IttmAction { write: t, dir: Dir::R, next: IttmTarget::State(0) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::step_classical_mut;
    use crate::exec::FStarOutcome;

    #[test]
    fn partial_stepping_matches_the_complete_stepper() {
        let m: ClassicalMachine = "1RB1LB_1LA1RH".parse().unwrap();
        let partial: Vec<[Option<ClassicalAction>; 2]> = m
            .rows()
            .iter()
            .map(|row| [Some(row[0]), Some(row[1])])
            .collect();
        let mut a = ClassicalConfig::blank();
        let mut b = ClassicalConfig::blank();
        loop {
            let halted_a = step_classical_mut(&m, &mut a).is_some();
            let halted_b = matches!(step_partial_classical(&partial, &mut b), PartialStep::Halted);
            assert_eq!(halted_a, halted_b);
            if halted_a {
                break;
            }
            assert_eq!((a.head, a.state, a.tape.clone()), (b.head, b.state, b.tape.clone()));
        }
    }

    #[test]
    fn one_state_stream_is_exactly_the_four_normal_forms() {
        let stream: Vec<String> = enumerate_classical(1).iter().map(|m| m.encode()).collect();
        let mut sorted = stream.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["0RA1RA", "0RH1RA", "1RA1RA", "1RH1RA"]);
        // Deterministic order.
        let again: Vec<String> = enumerate_classical(1).iter().map(|m| m.encode()).collect();
        assert_eq!(stream, again);
    }

    /// Blank-tape halting behavior, canonicalized under reflection since
    /// the stream pins the first move rightward.
    fn halting_behavior(m: &ClassicalMachine, budget: u64) -> Option<(u64, Vec<u8>)> {
        match run_classical(m, budget) {
            ClassicalRun::Halted { steps, tape } => {
                let (_, bits) = tape.trimmed();
                let forward: Vec<u8> = bits.to_vec();
                let mut backward = forward.clone();
                backward.reverse();
                Some((steps, forward.min(backward)))
            }
            ClassicalRun::OutOfBudget { .. } => None,
        }
    }

    #[test]
    fn one_state_stream_covers_the_raw_halting_behaviors() {
        use std::collections::BTreeSet;
        let mut raw_behaviors = BTreeSet::new();
        // All 64 raw one-state tables.
        for w0 in [0, 1] {
            for d0 in [Dir::L, Dir::R] {
                for t0 in [ClassicalTarget::State(0), ClassicalTarget::Halt] {
                    for w1 in [0, 1] {
                        for d1 in [Dir::L, Dir::R] {
                            for t1 in [ClassicalTarget::State(0), ClassicalTarget::Halt] {
                                let m = ClassicalMachine::new(vec![[
                                    ClassicalAction { write: w0, dir: d0, next: t0 },
                                    ClassicalAction { write: w1, dir: d1, next: t1 },
                                ]]);
                                if let Some(b) = halting_behavior(&m, 1_000) {
                                    raw_behaviors.insert(b);
                                }
                            }
                        }
                    }
                }
            }
        }
        let stream_behaviors: BTreeSet<_> = enumerate_classical(1)
            .iter()
            .filter_map(|m| halting_behavior(m, 1_000))
            .collect();
        assert_eq!(stream_behaviors, raw_behaviors);
    }

    #[test]
    fn two_state_stream_contains_the_champion_and_no_duplicates() {
        let stream = enumerate_classical(2);
        let encodings: Vec<String> = stream.iter().map(|m| m.encode()).collect();
        let mut dedup = encodings.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), encodings.len(), "stream has duplicate tables");
        assert!(encodings.iter().any(|e| e == "1RB1LB_1LA1RH"));
    }

    #[test]
    fn sigma_and_time_at_one_and_two_states() {
        let b1 = classical_budget_for(1);
        let sigma1 = sigma_classical(1, ScoreConvention::RadoCount, &b1, None).unwrap();
        assert_eq!((sigma1.value, sigma1.status), (1, SearchStatus::Exact));
        assert_eq!(sigma1.champion.as_deref(), Some("1RH1RA"));
        let time1 = s_time_classical(1, &b1, None).unwrap();
        assert_eq!((time1.value, time1.status), (1, SearchStatus::Exact));
        assert_eq!(time1.champion.as_deref(), Some("0RH1RA"));

        let b2 = classical_budget_for(2);
        let sigma2 = sigma_classical(2, ScoreConvention::RadoCount, &b2, None).unwrap();
        assert_eq!((sigma2.value, sigma2.status), (4, SearchStatus::Exact));
        let time2 = s_time_classical(2, &b2, None).unwrap();
        assert_eq!((time2.value, time2.status), (6, SearchStatus::Exact));

        // The champion's own run length can never beat the time report.
        let champion: ClassicalMachine = sigma2.champion.as_deref().unwrap().parse().unwrap();
        let ClassicalRun::Halted { steps, .. } = run_classical(&champion, 10_000) else {
            panic!("champion must halt");
        };
        assert!(steps <= time2.value);

        // Clean scores never exceed plain counts.
        let clean2 = sigma_classical(2, ScoreConvention::CleanTape, &b2, None).unwrap();
        assert!(clean2.value <= sigma2.value);
        assert_eq!(clean2.status, SearchStatus::Exact);

        // Certificates of all these reports verify.
        for report in [&sigma1, &time1, &sigma2, &time2, &clean2] {
            let cert = report.certificate.as_ref().expect("champions carry certificates");
            verify_certificate(cert).expect("certificate verifies");
        }
    }

    #[test]
    #[ignore = "takes minutes; the acceptance suite exercises it"]
    fn three_state_searches_are_exact() {
        let budget = classical_budget_for(3);
        let t = std::time::Instant::now();
        let sigma = sigma_classical(3, ScoreConvention::RadoCount, &budget, None).unwrap();
        eprintln!(
            "sigma(3) = {} ({:?}), {} machines, {} unresolved, champion {:?}, in {:?}",
            sigma.value, sigma.status, sigma.total, sigma.unresolved, sigma.champion, t.elapsed()
        );
        assert_eq!((sigma.value, sigma.status), (6, SearchStatus::Exact));
        let t = std::time::Instant::now();
        let time = s_time_classical(3, &budget, None).unwrap();
        eprintln!(
            "time(3) = {} ({:?}), {} unresolved, champion {:?}, in {:?}",
            time.value, time.status, time.unresolved, time.champion, t.elapsed()
        );
        assert_eq!((time.value, time.status), (21, SearchStatus::Exact));
    }

    #[test]
    #[ignore = "takes minutes; the acceptance suite exercises it"]
    fn four_state_searches_reach_the_known_records() {
        let budget = classical_budget_for(4);
        let t = std::time::Instant::now();
        let sigma = sigma_classical(4, ScoreConvention::RadoCount, &budget, None).unwrap();
        eprintln!(
            "sigma(4) >= {} ({:?}), {} machines, {} unresolved, champion {:?}, in {:?}",
            sigma.value, sigma.status, sigma.total, sigma.unresolved, sigma.champion, t.elapsed()
        );
        assert!(sigma.value >= 13);
        let t = std::time::Instant::now();
        let time = s_time_classical(4, &budget, None).unwrap();
        eprintln!(
            "time(4) >= {} ({:?}), {} unresolved, champion {:?}, in {:?}",
            time.value, time.status, time.unresolved, time.champion, t.elapsed()
        );
        assert!(time.value >= 107);
    }

    #[test]
    #[ignore = "diagnostic listing, run explicitly"]
    fn list_three_state_holdouts() {
        let budget = classical_budget_for(3);
        let mut holdouts = Vec::new();
        for m in enumerate_classical(3) {
            if decide_classical(&m, &budget) == ClassicalVerdict::Undecided {
                holdouts.push(m.encode());
            }
        }
        eprintln!("{} holdouts", holdouts.len());
        let huge = DeciderBudget {
            forward_steps: 1_000_000,
            pattern_steps: 200_000,
            backward_depth: 40,
            backward_nodes: 2_000_000,
            closure_configs: 2_000_000,
            automata_states: 4,
            automata_pairs: 2_000_000,
        };
        for h in &holdouts {
            let m: ClassicalMachine = h.parse().unwrap();
            let verdict = decide_classical(&m, &huge);
            let tag = match &verdict {
                ClassicalVerdict::Halted { steps, .. } => format!("HALTED at {steps}?!"),
                ClassicalVerdict::NonHalting(proof) => format!("{proof:?}"),
                ClassicalVerdict::Undecided => "still undecided".into(),
            };
            eprintln!("  {h}  {tag}");
        }
    }

    #[test]
    fn searches_are_deterministic_across_worker_counts() {
        let budget = classical_budget_for(2);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one
            .install(|| sigma_classical(2, ScoreConvention::RadoCount, &budget, None))
            .unwrap();
        let b = eight
            .install(|| sigma_classical(2, ScoreConvention::RadoCount, &budget, None))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ledger_resume_performs_no_new_simulations() {
        let dir = std::env::temp_dir().join(format!("search-ledger-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sigma2.jsonl");
        let _ = std::fs::remove_file(&path);
        let budget = classical_budget_for(2);

        let ledger = Ledger::open(&path).unwrap();
        let first = sigma_classical(2, ScoreConvention::RadoCount, &budget, Some(&ledger)).unwrap();
        assert_eq!(ledger.appended(), first.total);
        drop(ledger);

        let resumed = Ledger::open(&path).unwrap();
        let second =
            sigma_classical(2, ScoreConvention::RadoCount, &budget, Some(&resumed)).unwrap();
        assert_eq!(resumed.appended(), 0, "a completed search replays entirely from the ledger");
        assert_eq!(first, second);

        // A different measure is a different key space: it simulates anew.
        let third = s_time_classical(2, &budget, Some(&resumed)).unwrap();
        assert_eq!(resumed.appended(), third.total);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn one_state_ittm_stream_opens_with_the_halting_tables() {
        let started = std::time::Instant::now();
        let stream = enumerate_ittm(1, LimitRule::Limsup).unwrap();
        eprintln!("n=1 stream: {} tables in {:?}", stream.len(), started.elapsed());

        // Halting completions pop before sibling subtrees, so the eight
        // one-step halters open the stream; the third writes the single
        // output 1.
        for (i, m) in stream.iter().take(8).enumerate() {
            assert_eq!(
                m.action(RowId::State(0), [0, 0, 0]),
                IttmAction { write: triple_from_index(i), dir: Dir::R, next: IttmTarget::Halt },
            );
        }
        assert_eq!(stream[2].action(RowId::State(0), [0, 0, 0]).write, [0, 1, 0]);

        let encodings: Vec<String> = stream.iter().map(|m| m.encode()).collect();
        let mut dedup = encodings.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), encodings.len(), "stream has duplicate tables");

        let again: Vec<String> =
            enumerate_ittm(1, LimitRule::Limsup).unwrap().iter().map(|m| m.encode()).collect();
        assert_eq!(encodings, again, "stream order is deterministic");
    }

    #[test]
    fn enumeration_beyond_the_ceiling_is_refused_with_an_estimate() {
        let err = enumerate_ittm(3, LimitRule::Limsup).unwrap_err();
        assert_eq!(err.ceiling, ITTM_ENUM_CEILING);
        assert!(err.estimate_log10 > 50.0);
        assert!(err.to_string().contains("10^58"), "{err}");
    }

    #[test]
    fn sigma_inf_at_one_state_finds_at_least_one() {
        let budget = ExecBudget { max_block_steps: 512, max_limit_stages: 2, ..ExecBudget::default() };
        let report = sigma_inf_lower_bound(1, &budget, LimitRule::Limsup, None).unwrap();
        assert!(report.value >= 1, "one output 1 is provably attainable");
        assert_eq!(report.status, SearchStatus::LowerBound);
        let cert = report.certificate.as_ref().expect("champion carries a certificate");
        verify_certificate(cert).expect("certificate verifies");
        assert_eq!(cert.value, report.value);
    }

    #[test]
    fn tampered_certificates_fail_verification() {
        let budget = classical_budget_for(2);
        let report = sigma_classical(2, ScoreConvention::RadoCount, &budget, None).unwrap();
        let good = report.certificate.unwrap();
        verify_certificate(&good).unwrap();

        let mut wrong_value = good.clone();
        wrong_value.value += 1;
        assert!(matches!(
            verify_certificate(&wrong_value),
            Err(CertificateError::WrongValue { .. })
        ));

        let mut wrong_digest = good.clone();
        wrong_digest.output_digest = format!("00{}", &wrong_digest.output_digest[2..]);
        assert!(matches!(verify_certificate(&wrong_digest), Err(CertificateError::WrongDigest)));

        let mut wrong_stage = good;
        wrong_stage.stage = "w*0+1".into();
        assert!(matches!(
            verify_certificate(&wrong_stage),
            Err(CertificateError::WrongStage { .. })
        ));
    }

    #[test]
    fn certificates_round_trip_through_json() {
        let budget = classical_budget_for(1);
        let report = sigma_classical(1, ScoreConvention::RadoCount, &budget, None).unwrap();
        let cert = report.certificate.unwrap();
        let json = serde_json::to_string_pretty(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
    }

    #[test]
    fn lifted_classical_machines_compute_their_clean_score() {
        // The lift is faithful for runs that never move left of start.
        let budget = ExecBudget::default();
        for m in enumerate_classical(1) {
            let ClassicalRun::Halted { tape, .. } = run_classical(&m, 1_000) else { continue };
            let (lo, _) = tape.bounds();
            if lo < 0 {
                continue;
            }
            let CleanOutcome::Clean(k) = is_clean_output(&tape) else { continue };
            let lifted = lift_classical(&m);
            assert_eq!(
                crate::exec::f_star(&lifted, 0, &budget, LimitRule::Limsup),
                FStarOutcome::Value(k),
                "lift of {} must compute its clean score",
                m.encode()
            );
        }

        // And the transfinite space therefore dominates liftable champions.
        let fast = ExecBudget { max_block_steps: 512, max_limit_stages: 2, ..budget };
        let inf = sigma_inf_lower_bound(1, &fast, LimitRule::Limsup, None).unwrap();
        assert!(inf.value >= 1);
    }
}
