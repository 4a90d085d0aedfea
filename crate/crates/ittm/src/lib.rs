//! A workbench for classical and infinite-time Turing machines.
//!
//! The crate simulates classical two-symbol machines and their
//! infinite-time extension with three one-way tapes, executes the latter
//! through transfinite stages by certifying eventually periodic behavior
//! within each block, searches small state counts for busy beaver values,
//! and mechanizes a composition that bounds values of the infinite-time
//! analogue from below. Everything a search or run claims is backed by a
//! re-checkable artifact: halting runs by replayable certificates,
//! non-halting verdicts by recurring limit snapshots, and undetermined
//! results by the exact budget that ran out.
//!
//! Start with [`tape::EPTape`] for the tape representation,
//! [`classical`] and [`ittm`] for the two machine families, [`exec`] for
//! transfinite runs, and [`search`] for the surveys.

pub mod classical;
pub mod cli;
pub mod compose;
pub mod decider;
pub mod exec;
pub mod format;
pub mod ittm;
pub mod ledger;
pub mod search;
pub mod tape;

pub use classical::{run_classical, ClassicalMachine, ClassicalRun, Dir};
pub use exec::{
    f_star, run_transfinite, run_transfinite_traced, ExecBudget, FStarOutcome, RunOutcome,
};
pub use ittm::{ITTMachine, LimitRule, OrdinalStage, Snapshot};
pub use tape::EPTape;
