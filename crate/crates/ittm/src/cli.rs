//! Command-line front end. Every subcommand is a thin wrapper over the
//! library: simulation, searches, the doubled-application construction,
//! certificate replay, and the unary codec.
//!
//! Exit codes: 0 when the command reached a determinate answer (halting,
//! a certified non-halting verdict, a search report), 1 when the final
//! answer is "undetermined" under the given budgets, 2 for input errors
//! (unreadable files, malformed machines or tapes, bad flags).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::classical::{is_clean_output, run_classical, score_rado, CleanOutcome, ClassicalRun};
use crate::compose::{compose_theorem1, OneTapeITTM};
use crate::decider::{decide_classical, ClassicalVerdict, DeciderBudget, NonHaltProof};
use crate::exec::{f_star, run_transfinite, ExecBudget, FStarOutcome, RunOutcome};
use crate::format::{decode_ittm, parse_document, serialize_document, MachineDocument};
use crate::ittm::{ITTMachine, LimitRule, TapeId};
use crate::ledger::Ledger;
use crate::search::{
    classical_budget_for, s_time_classical, sigma_classical, sigma_inf_lower_bound,
    verify_certificate, Certificate, ScoreConvention, SearchReport, SearchStatus,
};
use crate::tape::EPTape;
use crate::ClassicalMachine;

/// Exit code for a determinate answer.
const EXIT_OK: i32 = 0;
/// Exit code when "undetermined" is the final answer.
const EXIT_UNDETERMINED: i32 = 1;
/// Exit code for input errors.
const EXIT_INPUT: i32 = 2;

#[derive(Parser)]
#[command(
    name = "ittm",
    version,
    about = "Workbench for classical and transfinite Turing machines",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSONL ledger of per-machine outcomes; searches replay cached rows
    /// instead of re-simulating and append only what is new.
    #[arg(long, global = true, value_name = "PATH")]
    ledger: Option<PathBuf>,

    /// Worker threads for searches. Reports are identical for every
    /// worker count; this only changes wall-clock time.
    #[arg(long, global = true, value_name = "K")]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum RuleArg {
    Limsup,
    Liminf,
}

impl From<RuleArg> for LimitRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Limsup => LimitRule::Limsup,
            RuleArg::Liminf => LimitRule::Liminf,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum)]
enum ConventionArg {
    #[default]
    Rado,
    Clean,
}

impl From<ConventionArg> for ScoreConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Rado => ScoreConvention::RadoCount,
            ConventionArg::Clean => ScoreConvention::CleanTape,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a classical machine from the blank tape.
    Sim {
        /// Compact encoding ("1RB1LB_1LA1RH") or a machine document file.
        #[arg(long, value_name = "MACHINE")]
        machine: String,
        /// Step budget before the deciders take over.
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
    },
    /// Run a transfinite machine through limit stages.
    Itsim {
        /// Machine document file, or a compact ";"-joined table.
        #[arg(long, value_name = "MACHINE")]
        machine: String,
        /// Limit rule; overrides the rule named in the document.
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        /// Successor steps allowed per block between limit stages.
        #[arg(long, default_value_t = 50_000)]
        max_block_steps: u64,
        /// Limit stages allowed before giving up.
        #[arg(long, default_value_t = 64)]
        max_limits: u64,
        /// Run on the unary numeral for this value (default: blank tape).
        #[arg(long, default_value_t = 0)]
        input: u64,
    },
    /// Exhaustive classical score search over n-state machines.
    Sigma {
        #[arg(long)]
        n: usize,
        /// Scoring convention: rado counts every 1, clean requires a
        /// solid block and counts its length.
        #[arg(long, value_enum, default_value_t)]
        convention: ConventionArg,
        /// Forward step budget per machine (default scales with n).
        #[arg(long, value_name = "STEPS")]
        budget: Option<u64>,
    },
    /// Exhaustive classical step-count search over n-state machines.
    Stime {
        #[arg(long)]
        n: usize,
        /// Accepted for symmetry with sigma; the step count ignores it.
        #[arg(long, value_enum, default_value_t)]
        convention: ConventionArg,
        /// Forward step budget per machine (default scales with n).
        #[arg(long, value_name = "STEPS")]
        budget: Option<u64>,
    },
    /// Lower bound for the transfinite score on blank input.
    SigmaInfLb {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = RuleArg::Limsup)]
        rule: RuleArg,
        /// Successor steps allowed per block between limit stages.
        #[arg(long, default_value_t = 512)]
        max_block_steps: u64,
        /// Limit stages allowed per machine.
        #[arg(long, default_value_t = 2)]
        max_limits: u64,
        /// Also write the champion certificate to this file.
        #[arg(long, value_name = "PATH")]
        certificate_out: Option<PathBuf>,
    },
    /// Splice a one-tape machine into the doubled-application machine.
    Compose {
        /// Machine document file, or a compact ";"-joined table. Must
        /// touch a single tape.
        #[arg(long, value_name = "MACHINE")]
        machine: String,
        /// Argument planted on the input tape.
        #[arg(long)]
        x: u64,
        /// Print the composed machine as a document.
        #[arg(long)]
        emit: bool,
        /// Skip running the composed machine; report only the accounting.
        #[arg(long)]
        no_run: bool,
        #[arg(long, value_enum, default_value_t = RuleArg::Limsup)]
        rule: RuleArg,
        #[arg(long, default_value_t = 50_000)]
        max_block_steps: u64,
        #[arg(long, default_value_t = 64)]
        max_limits: u64,
    },
    /// Value of a transfinite machine's unary function at one input.
    Fstar {
        /// Machine document file, or a compact ";"-joined table.
        #[arg(long, value_name = "MACHINE")]
        machine: String,
        #[arg(long)]
        n: u64,
        /// Limit rule; overrides the rule named in the document.
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        #[arg(long, default_value_t = 50_000)]
        max_block_steps: u64,
        #[arg(long, default_value_t = 64)]
        max_limits: u64,
    },
    /// Re-check a saved certificate by re-simulation.
    Verify {
        /// JSON certificate file.
        #[arg(long, value_name = "PATH")]
        certificate: PathBuf,
    },
    /// Print the unary numeral tape for a value.
    Encode { n: u64 },
    /// Decode a unary numeral tape back to its value.
    Decode {
        /// Tape text: "prefix(period)^w", or bare bits with an implied
        /// all-zero continuation.
        tape: String,
    },
}

/// Parses the process arguments, runs the selected command, and returns
/// the exit code. Usage errors exit through clap with code 2.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let ledger = match cli.ledger.as_deref().map(Ledger::open).transpose() {
        Ok(l) => l,
        Err(e) => return input_error(&format!("ledger: {e}")),
    };
    let outcome = match cli.workers {
        None => dispatch(&cli.command, ledger.as_ref()),
        Some(k) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(p) => p,
                Err(e) => return input_error(&format!("workers: {e}")),
            };
            pool.install(|| dispatch(&cli.command, ledger.as_ref()))
        }
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => input_error(&msg),
    }
}

fn input_error(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

/// Runs one command. `Ok` carries the exit code for answers (determinate
/// or undetermined); `Err` is an input error.
fn dispatch(command: &Command, ledger: Option<&Ledger>) -> Result<i32, String> {
    match command {
        Command::Sim { machine, steps } => cmd_sim(machine, *steps),
        Command::Itsim { machine, rule, max_block_steps, max_limits, input } => {
            let budget = exec_budget(*max_block_steps, *max_limits);
            cmd_itsim(machine, *rule, &budget, *input)
        }
        Command::Sigma { n, convention, budget } => {
            let report = sigma_classical(
                *n,
                (*convention).into(),
                &search_budget(*n, *budget),
                ledger,
            )
            .map_err(|e| format!("search: {e}"))?;
            print_search_report(&report, &format!("sigma({n})"));
            Ok(EXIT_OK)
        }
        Command::Stime { n, budget, .. } => {
            let report = s_time_classical(*n, &search_budget(*n, *budget), ledger)
                .map_err(|e| format!("search: {e}"))?;
            print_search_report(&report, &format!("stime({n})"));
            Ok(EXIT_OK)
        }
        Command::SigmaInfLb { n, rule, max_block_steps, max_limits, certificate_out } => {
            let budget = exec_budget(*max_block_steps, *max_limits);
            cmd_sigma_inf(*n, (*rule).into(), &budget, certificate_out.as_deref(), ledger)
        }
        Command::Compose { machine, x, emit, no_run, rule, max_block_steps, max_limits } => {
            let budget = exec_budget(*max_block_steps, *max_limits);
            cmd_compose(machine, *x, *emit, !*no_run, (*rule).into(), &budget)
        }
        Command::Fstar { machine, n, rule, max_block_steps, max_limits } => {
            let budget = exec_budget(*max_block_steps, *max_limits);
            cmd_fstar(machine, *n, *rule, &budget)
        }
        Command::Verify { certificate } => cmd_verify(certificate),
        Command::Encode { n } => {
            println!("{}", EPTape::encode_unary(*n));
            Ok(EXIT_OK)
        }
        Command::Decode { tape } => cmd_decode(tape),
    }
}

fn exec_budget(max_block_steps: u64, max_limit_stages: u64) -> ExecBudget {
    ExecBudget { max_block_steps, max_limit_stages, ..ExecBudget::default() }
}

/// Search budget for `sigma`/`stime`: the size-scaled default, with the
/// forward window overridden when the user names one.
fn search_budget(n: usize, forward: Option<u64>) -> DeciderBudget {
    let mut budget = classical_budget_for(n);
    if let Some(steps) = forward {
        budget.forward_steps = steps;
        budget.pattern_steps = steps.min(budget.pattern_steps);
    }
    budget
}

// ---------------------------------------------------------------------
// machine loading

/// Classical machines arrive as compact encodings or document files.
fn load_classical(arg: &str) -> Result<ClassicalMachine, String> {
    if let Ok(m) = arg.parse::<ClassicalMachine>() {
        return Ok(m);
    }
    let text = fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?;
    match parse_document(&text) {
        Ok(MachineDocument::Classical(m)) => Ok(m),
        Ok(MachineDocument::Ittm { .. }) => {
            Err(format!("{arg} holds a transfinite machine; run it with `itsim`"))
        }
        Err(e) => Err(format!("{arg}: {e}")),
    }
}

/// Transfinite machines arrive as document files (which carry a limit
/// rule) or compact ";"-joined tables (which do not).
fn load_ittm(arg: &str) -> Result<(ITTMachine, Option<LimitRule>), String> {
    if Path::new(arg).is_file() {
        let text = fs::read_to_string(arg).map_err(|e| format!("cannot read {arg}: {e}"))?;
        match parse_document(&text) {
            Ok(MachineDocument::Ittm { machine, rule }) => Ok((machine, Some(rule))),
            Ok(MachineDocument::Classical(_)) => {
                Err(format!("{arg} holds a classical machine; run it with `sim`"))
            }
            Err(e) => Err(format!("{arg}: {e}")),
        }
    } else {
        match decode_ittm(arg) {
            Ok(m) => Ok((m, None)),
            Err(e) => Err(format!("{arg} is neither a readable file nor a compact table: {e}")),
        }
    }
}

// ---------------------------------------------------------------------
// subcommands

fn cmd_sim(machine: &str, steps: u64) -> Result<i32, String> {
    let m = load_classical(machine)?;
    match run_classical(&m, steps) {
        ClassicalRun::Halted { steps, tape } => {
            let ones = score_rado(&tape);
            let clean = match is_clean_output(&tape) {
                CleanOutcome::Clean(v) => format!("clean block of {v}"),
                CleanOutcome::NotClean => "not a clean block".to_string(),
            };
            println!("halted after {steps} steps");
            println!("ones: {ones} ({clean})");
            let (start, bits) = tape.trimmed();
            println!("tape: {}", render_window(start, bits));
            Ok(EXIT_OK)
        }
        ClassicalRun::OutOfBudget { .. } => {
            // The step budget alone proves nothing; ask the deciders.
            let budget = DeciderBudget { forward_steps: steps, ..DeciderBudget::default() };
            match decide_classical(&m, &budget) {
                ClassicalVerdict::Halted { steps, tape } => {
                    println!("halted after {steps} steps");
                    println!("ones: {}", score_rado(&tape));
                    Ok(EXIT_OK)
                }
                ClassicalVerdict::NonHalting(proof) => {
                    println!("never halts: {}", proof_line(&proof));
                    Ok(EXIT_OK)
                }
                ClassicalVerdict::Undecided => {
                    println!("undetermined after {steps} steps");
                    Ok(EXIT_UNDETERMINED)
                }
            }
        }
    }
}

fn render_window(start: i64, bits: &[u8]) -> String {
    if bits.is_empty() {
        return "all zeros".to_string();
    }
    let mut out = format!("cell {start}: ");
    for b in bits {
        let _ = write!(out, "{b}");
    }
    out
}

fn proof_line(proof: &NonHaltProof) -> String {
    match proof {
        NonHaltProof::NoHaltEntries => "no transition targets halt".to_string(),
        NonHaltProof::DeadHaltEntries => {
            "every halt entry sits on an unreachable state".to_string()
        }
        NonHaltProof::ExactCycle { t0, p } => {
            format!("configuration at step {t0} recurs with period {p}")
        }
        NonHaltProof::TranslatedCycle { t0, p, d } => {
            format!("configuration at step {t0} recurs with period {p} shifted by {d}")
        }
        NonHaltProof::HaltUnreachable { depth } => {
            format!("no halting configuration is reachable (backward depth {depth})")
        }
        NonHaltProof::AbstractClosure { configs } => {
            format!("halt-free closure of {configs} run-length configurations")
        }
        NonHaltProof::AutomatonClosure { left_states, right_states } => format!(
            "halt-free closure under {left_states}-state/{right_states}-state tape scanners"
        ),
    }
}

fn cmd_itsim(
    machine: &str,
    rule_flag: Option<RuleArg>,
    budget: &ExecBudget,
    input: u64,
) -> Result<i32, String> {
    let (m, doc_rule) = load_ittm(machine)?;
    let rule = pick_rule(rule_flag, doc_rule);
    let tape =
        if input == 0 { EPTape::blank() } else { EPTape::encode_unary(input) };
    match run_transfinite(&m, tape, budget, rule) {
        RunOutcome::Halted { snapshot } => {
            println!("Halted at {}", snapshot.stage);
            let out = snapshot.tape(TapeId::Output);
            match out.decode_unary() {
                Some(v) => println!("output: {out} (unary {v})"),
                None => println!("output: {out}"),
            }
            Ok(EXIT_OK)
        }
        RunOutcome::NonHaltingCertified { witness } => {
            println!(
                "never halts: limit snapshots at {} and {} coincide",
                witness.first.stage, witness.second.stage
            );
            Ok(EXIT_OK)
        }
        RunOutcome::Undetermined { reason, stage } => {
            println!("undetermined at {stage}: {reason}");
            Ok(EXIT_UNDETERMINED)
        }
    }
}

/// An explicit flag wins; otherwise the document's rule; otherwise limsup.
fn pick_rule(flag: Option<RuleArg>, doc: Option<LimitRule>) -> LimitRule {
    flag.map(LimitRule::from).or(doc).unwrap_or(LimitRule::Limsup)
}

fn print_search_report(report: &SearchReport, label: &str) {
    let status = match report.status {
        SearchStatus::Exact => "Exact",
        SearchStatus::LowerBound => "LowerBound",
    };
    let relation = match report.status {
        SearchStatus::Exact => "=",
        SearchStatus::LowerBound => ">=",
    };
    println!("{label} {relation} {} ({status}, {})", report.value, report.measure.name());
    match &report.champion {
        Some(c) => println!("champion: {c}"),
        None => println!("champion: none (nothing halted)"),
    }
    println!("machines: {}, unresolved: {}", report.total, report.unresolved);
    if let Some(cert) = &report.certificate {
        println!("certificate: {}", certificate_json(cert));
    }
}

fn certificate_json(cert: &Certificate) -> String {
    serde_json::to_string(cert).expect("certificates serialize")
}

fn cmd_sigma_inf(
    n: usize,
    rule: LimitRule,
    budget: &ExecBudget,
    certificate_out: Option<&Path>,
    ledger: Option<&Ledger>,
) -> Result<i32, String> {
    let report =
        sigma_inf_lower_bound(n, budget, rule, ledger).map_err(|e| format!("search: {e}"))?;
    println!("sigma-inf({n}) >= {} (LowerBound, rule {})", report.value, report.rule.name());
    match &report.champion {
        Some(c) => println!("champion: {c}"),
        None => println!("champion: none (nothing halted with unary output)"),
    }
    let coverage = if report.truncated { "a truncated prefix of" } else { "all of" };
    println!(
        "machines: {} ({coverage} the normalized stream), unresolved: {}",
        report.total, report.unresolved
    );
    if let Some(cert) = &report.certificate {
        let json = certificate_json(cert);
        println!("certificate: {json}");
        if let Some(path) = certificate_out {
            fs::write(path, format!("{json}\n"))
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
    } else if certificate_out.is_some() {
        return Err("no champion, so no certificate to write".to_string());
    }
    Ok(EXIT_OK)
}

fn cmd_compose(
    machine: &str,
    x: u64,
    emit: bool,
    run: bool,
    rule: LimitRule,
    budget: &ExecBudget,
) -> Result<i32, String> {
    let (m, doc_rule) = load_ittm(machine)?;
    let (one_tape, tape) = OneTapeITTM::detect(&m).map_err(|e| format!("{machine}: {e}"))?;
    let composition = compose_theorem1(&one_tape, x);
    println!(
        "composed: x={}, embedded states C={}, overhead h=2C+9={}, total s(x)=x+h={}",
        composition.x, composition.c, composition.h, composition.s
    );
    println!("embedded machine reads tape {tape:?}");
    if emit {
        let doc = MachineDocument::Ittm {
            machine: composition.machine.clone(),
            rule: doc_rule.unwrap_or(rule),
        };
        print!("{}", serialize_document(&doc));
    }
    if !run {
        return Ok(EXIT_OK);
    }
    match run_transfinite(&composition.machine, EPTape::blank(), budget, rule) {
        RunOutcome::Halted { snapshot } => {
            println!("Halted at {}", snapshot.stage);
            let out = snapshot.tape(TapeId::Output);
            match out.decode_unary() {
                Some(v) => println!("output: {out} (unary {v})"),
                None => println!("output: {out}"),
            }
            Ok(EXIT_OK)
        }
        RunOutcome::NonHaltingCertified { witness } => {
            println!(
                "never halts: limit snapshots at {} and {} coincide",
                witness.first.stage, witness.second.stage
            );
            Ok(EXIT_OK)
        }
        RunOutcome::Undetermined { reason, stage } => {
            println!("undetermined at {stage}: {reason}");
            Ok(EXIT_UNDETERMINED)
        }
    }
}

fn cmd_fstar(
    machine: &str,
    n: u64,
    rule_flag: Option<RuleArg>,
    budget: &ExecBudget,
) -> Result<i32, String> {
    let (m, doc_rule) = load_ittm(machine)?;
    let rule = pick_rule(rule_flag, doc_rule);
    match f_star(&m, n, budget, rule) {
        FStarOutcome::Value(v) => {
            println!("f*({n}) = {v}");
            Ok(EXIT_OK)
        }
        FStarOutcome::Diverges => {
            println!("f*({n}) undefined: certified non-halting");
            Ok(EXIT_OK)
        }
        FStarOutcome::NotUnary => {
            println!("f*({n}) undefined: output is not a unary numeral");
            Ok(EXIT_OK)
        }
        FStarOutcome::Undetermined { reason, stage } => {
            println!("undetermined at {stage}: {reason}");
            Ok(EXIT_UNDETERMINED)
        }
    }
}

fn cmd_verify(path: &Path) -> Result<i32, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cert: Certificate = serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a certificate: {e}", path.display()))?;
    match verify_certificate(&cert) {
        Ok(()) => {
            println!(
                "certificate verifies: {} {} = {} at {}",
                cert.kind, cert.measure, cert.value, cert.stage
            );
            Ok(EXIT_OK)
        }
        Err(e) => {
            println!("certificate rejected: {e}");
            Ok(EXIT_UNDETERMINED)
        }
    }
}

fn cmd_decode(tape: &str) -> Result<i32, String> {
    let parsed: EPTape = tape.parse().map_err(|e| format!("{tape:?}: {e}"))?;
    match parsed.decode_unary() {
        Some(v) => println!("{v}"),
        None => println!("undefined (not a unary numeral)"),
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_command_tree_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn rules_resolve_in_flag_document_default_order() {
        assert_eq!(pick_rule(Some(RuleArg::Liminf), Some(LimitRule::Limsup)), LimitRule::Liminf);
        assert_eq!(pick_rule(None, Some(LimitRule::Liminf)), LimitRule::Liminf);
        assert_eq!(pick_rule(None, None), LimitRule::Limsup);
    }

    #[test]
    fn compact_encodings_load_without_touching_the_filesystem() {
        let m = load_classical("1RB1LB_1LA1RH").unwrap();
        assert_eq!(m.n_states(), 2);
        assert!(load_classical("definitely-not-a-machine").is_err());
    }
}
