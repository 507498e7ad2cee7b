//! Command-line frontend tying parsing, analysis, oracles, generators and
//! reporting together.
//!
//! Exit codes: 0 — analysis completed (the report carries the answer, yes or
//! no); 2 — parse or validation error; 3 — budget exceeded or inconclusive;
//! 4 — internal invariant violation (a certificate failed re-verification).

mod report;
mod runfile;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cutoff_core::analysis::{
    build_scaling_witness, decide_bounded_loss, decide_cutoff, decide_cutoff_acyclic, Decision,
    WitnessOutcome,
};
use cutoff_core::continuous::ContinuousCertificate;
use cutoff_core::generators::{self, catalog};
use cutoff_core::model::text::{parse_input, serialize_input, ParsedInput};
use cutoff_core::model::{
    leader_to_net, protocol_to_net, PetriNetSystem, Protocol, SymmetricProtocol,
};
use cutoff_core::oracle::{
    min_consecutive_pair, semi_decide_cutoff, sweep_scaled_reachability, validate_rle_run,
    ParityWitnesses, ReachStatus,
};
use cutoff_core::symmetric::{
    decide_leader_cutoff, decide_symmetric_bounded_loss, decide_symmetric_cutoff, LeaderDecision,
    SupportReading,
};
use cutoff_core::{exact::SolutionVector, par};

use report::{
    certificates_of, input_digest, print_text, witness_blocks, Certificates, Report,
    WitnessReport,
};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "cutoff", version, about = "Cut-off analysis for rendez-vous protocols and Petri nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Cutoff,
    CutoffAcyclic,
    BoundedLoss,
    Symmetric,
    SymmetricBoundedLoss,
    SymmetricLeader,
}

impl Mode {
    fn problem_name(self) -> &'static str {
        match self {
            Mode::Cutoff => "cutoff",
            Mode::CutoffAcyclic => "cutoff-acyclic",
            Mode::BoundedLoss => "bounded-loss",
            Mode::Symmetric => "symmetric",
            Mode::SymmetricBoundedLoss => "symmetric-bounded-loss",
            Mode::SymmetricLeader => "symmetric-leader",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide a cut-off style problem for a protocol or net file.
    Analyze(AnalyzeArgs),
    /// Sweep scaling factors with the explicit-state oracle.
    Oracle(OracleArgs),
    /// Generate instances: reductions, random instances, built-ins.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Validate a run-length-encoded run against a net.
    ValidateRun(ValidateRunArgs),
    /// Run the random-protocol agreement suite.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Input file, or `builtin:<name>`.
    #[arg(long)]
    input: String,
    #[arg(long)]
    json: bool,
    /// Materialize and validate the scaling witness run.
    #[arg(long)]
    witness: bool,
    /// Report the explicit cut-off bound.
    #[arg(long)]
    bound: bool,
    /// Node budget for integer-program search (leader mode).
    #[arg(long, default_value_t = 100_000)]
    ilp_budget: u64,
    /// Step budget for witness materialization.
    #[arg(long, default_value_t = 1_000_000)]
    step_budget: u64,
}

#[derive(Args)]
struct OracleArgs {
    /// Input file, or `builtin:<name>`.
    #[arg(long)]
    input: String,
    #[arg(long, default_value_t = 10)]
    n_max: u64,
    /// Marking budget per search.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Protocol of the circuit-value reduction.
    Cvp {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leader protocol of the 3-SAT reduction.
    #[command(name = "3sat")]
    ThreeSat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded random protocol.
    Random {
        #[arg(long, default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 2)]
        max_letters: usize,
        #[arg(long, default_value_t = 6)]
        max_rules: usize,
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One of the built-in instances.
    Builtin {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ValidateRunArgs {
    /// Net (or protocol) file, or `builtin:<name>`.
    #[arg(long)]
    input: String,
    /// Run file in the `[rle-run]` format.
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: u64,
    #[arg(long)]
    json: bool,
    /// Oracle sweep bound per instance.
    #[arg(long, default_value_t = 8)]
    n_max: u64,
    /// Marking budget per search.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Oracle(args) => oracle(args),
        Command::Gen(args) => gen(args),
        Command::ValidateRun(args) => validate_run(args),
        Command::Corpus(args) => corpus(args),
    };
    ExitCode::from(code)
}

fn fail(msg: impl std::fmt::Display, code: u8) -> u8 {
    eprintln!("error: {msg}");
    code
}

/// Read a file or a `builtin:<name>` instance as text.
fn load_input(spec: &str) -> Result<String, String> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        builtin_text(name).ok_or_else(|| {
            format!("unknown builtin `{name}`; available: {}", catalog::NAMES.join(", "))
        })
    } else {
        std::fs::read_to_string(spec).map_err(|e| format!("cannot read `{spec}`: {e}"))
    }
}

fn builtin_text(name: &str) -> Option<String> {
    let input = match name {
        "diamond" => ParsedInput::Net(catalog::diamond()),
        "relay" => ParsedInput::Net(catalog::relay()),
        "single-rule" => ParsedInput::Symmetric(catalog::single_rule()),
        "two-letter" => ParsedInput::Symmetric(catalog::two_letter()),
        "sat-demo" => ParsedInput::Leader(catalog::sat_demo()),
        "unsat-demo" => ParsedInput::Leader(catalog::unsat_demo()),
        _ => return None,
    };
    Some(serialize_input(&input))
}

/// Net system for modes that analyze nets, translating protocols on the fly.
fn as_net_system(input: &ParsedInput) -> Result<PetriNetSystem, String> {
    match input {
        ParsedInput::Net(sys) => Ok(sys.clone()),
        ParsedInput::Plain(p) => Ok(protocol_to_net(p)),
        ParsedInput::Symmetric(p) => Ok(protocol_to_net(p.protocol())),
        ParsedInput::Leader(_) => {
            Err("leader protocols are decided by --mode symmetric-leader".into())
        }
    }
}

fn as_protocol(input: &ParsedInput) -> Result<Protocol, String> {
    match input {
        ParsedInput::Plain(p) => Ok(p.clone()),
        ParsedInput::Symmetric(p) => Ok(p.protocol().clone()),
        _ => Err("this mode expects a protocol file".into()),
    }
}

fn as_symmetric(input: &ParsedInput) -> Result<SymmetricProtocol, String> {
    match input {
        ParsedInput::Symmetric(p) => Ok(p.clone()),
        ParsedInput::Plain(p) => SymmetricProtocol::new(p.clone()).map_err(|e| e.to_string()),
        _ => Err("this mode expects a symmetric protocol file".into()),
    }
}

fn emit(report: &Report, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    } else {
        print_text(report);
    }
}

fn analyze(args: AnalyzeArgs) -> u8 {
    let start = Instant::now();
    let text = match load_input(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let parsed = match parse_input(&text) {
        Ok(p) => p,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let digest = input_digest(&text);

    let mut exit = EXIT_OK;
    let mut witness_run: Option<(PetriNetSystem, cutoff_core::analysis::RleRun)> = None;
    let mut report = Report {
        problem: args.mode.problem_name().into(),
        input_digest: digest,
        answer: String::new(),
        certificates: Certificates::default(),
        parity_witnesses: None,
        oracle_cross_check: None,
        witness: None,
        notes: Vec::new(),
        timing_ms: 0,
    };

    match args.mode {
        Mode::Cutoff | Mode::CutoffAcyclic => {
            let sys = match as_net_system(&parsed) {
                Ok(s) => s,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let acyclic = args.mode == Mode::CutoffAcyclic;
            let decision = if acyclic {
                match decide_cutoff_acyclic(&sys) {
                    Ok(d) => d,
                    Err(e) => return fail(e, EXIT_INPUT),
                }
            } else {
                decide_cutoff(&sys)
            };
            if let Err(e) =
                cutoff_core::analysis::verify_cutoff_decision(&sys, &decision, !acyclic)
            {
                return fail(format!("certificate re-verification failed: {e}"), EXIT_INVARIANT);
            }
            report.answer = if decision.answer { "yes" } else { "no" }.into();
            if !args.bound {
                // The bound is part of the certificates only on request.
                let mut d = decision.clone();
                d.bound = None;
                report.certificates = certificates_of(&sys.net, &sys.net.places, &d);
            } else {
                report.certificates = certificates_of(&sys.net, &sys.net.places, &decision);
            }
            report.notes.extend(decision.notes.iter().cloned());
            if args.witness && decision.answer && !acyclic {
                match witness_report(&sys, &decision, args.step_budget) {
                    Ok((w, run)) => {
                        report.witness = Some(w);
                        witness_run = run.map(|r| (sys.clone(), r));
                    }
                    Err(e) => return fail(e, EXIT_INVARIANT),
                }
            }
        }
        Mode::BoundedLoss => {
            let p = match as_protocol(&parsed) {
                Ok(p) => p,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let decision = decide_bounded_loss(&p);
            if let Err(e) = cutoff_core::analysis::verify_bounded_loss_decision(&p, &decision) {
                return fail(format!("certificate re-verification failed: {e}"), EXIT_INVARIANT);
            }
            let net = protocol_to_net(&p);
            report.answer = if decision.answer { "yes" } else { "no" }.into();
            report.certificates = certificates_of(&net.net, &p.states, &decision);
            report.notes.extend(decision.notes.iter().cloned());
        }
        Mode::Symmetric | Mode::SymmetricBoundedLoss => {
            let p = match as_symmetric(&parsed) {
                Ok(p) => p,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let decision = if args.mode == Mode::Symmetric {
                decide_symmetric_cutoff(&p)
            } else {
                decide_symmetric_bounded_loss(&p)
            };
            if let Err(e) = verify_symmetric_decision(&p, &decision, args.mode) {
                return fail(format!("certificate re-verification failed: {e}"), EXIT_INVARIANT);
            }
            let net = protocol_to_net(p.protocol());
            report.answer = if decision.answer { "yes" } else { "no" }.into();
            report.certificates = certificates_of(&net.net, &p.states, &decision);
            report.notes.extend(decision.notes.iter().cloned());
        }
        Mode::SymmetricLeader => {
            let ParsedInput::Leader(lp) = &parsed else {
                return fail("this mode expects a leader protocol file", EXIT_INPUT);
            };
            match decide_leader_cutoff(lp, args.ilp_budget, SupportReading::default()) {
                Err(e) => return fail(e, EXIT_INPUT),
                Ok(LeaderDecision::Inconclusive { notes }) => {
                    report.answer = "inconclusive".into();
                    report.notes.extend(notes);
                    exit = EXIT_BUDGET;
                }
                Ok(LeaderDecision::Decided(decision)) => {
                    // Certificates refer to the pruned net the search ran on.
                    if decision.answer {
                        let (sys, ann) = pruned_leader_net(lp);
                        for cert in &decision.parity_certs {
                            if let Err(e) =
                                cutoff_core::symmetric::verify_leader_cert(&sys.net, &ann, cert)
                            {
                                return fail(
                                    format!("certificate re-verification failed: {e}"),
                                    EXIT_INVARIANT,
                                );
                            }
                        }
                        report.certificates =
                            certificates_of(&sys.net, &sys.net.places, &decision);
                    }
                    report.answer = if decision.answer { "yes" } else { "no" }.into();
                    report.notes.extend(decision.notes.iter().cloned());
                }
            }
        }
    }
    report.timing_ms = start.elapsed().as_millis();
    emit(&report, args.json);
    // In text mode a materialized witness is also dumped in the run-file
    // format, ready for `validate-run`.
    if !args.json {
        if let Some((sys, run)) = &witness_run {
            let params = report.witness.as_ref().and_then(|w| w.scale.as_ref());
            let scale: num_bigint::BigUint =
                params.map(|s| s.parse().unwrap_or_default()).unwrap_or_default();
            let start_marking = sys.initial.scaled(&scale);
            print!("{}", runfile::serialize_run(&sys.net, &start_marking, run));
        }
    }
    exit
}

/// The pruned leader net certificates refer to (follower states restricted
/// to those on an initial-to-final path).
fn pruned_leader_net(
    lp: &cutoff_core::model::LeaderProtocolPair,
) -> (PetriNetSystem, cutoff_core::model::LeaderNetAnnotation) {
    let pruned = cutoff_core::symmetric::prune_follower(lp).unwrap_or_else(|| lp.clone());
    leader_to_net(&pruned)
}

type WitnessAndRun = (WitnessReport, Option<cutoff_core::analysis::RleRun>);

fn witness_report(
    sys: &PetriNetSystem,
    decision: &Decision,
    step_budget: u64,
) -> Result<WitnessAndRun, String> {
    let support = decision.support.clone().unwrap_or_default();
    let solution = decision.rational_solution.clone().unwrap_or_default();
    let cert = ContinuousCertificate {
        support,
        solution,
        forward_ok: true,
        backward_ok: true,
    };
    match build_scaling_witness(sys, &cert, step_budget) {
        Err(e) => Err(format!("witness construction failed: {e}")),
        Ok(WitnessOutcome::TooLarge { params, expanded_steps }) => Ok((
            WitnessReport {
                outcome: "too-large".into(),
                expanded_steps: Some(expanded_steps.to_string()),
                validated: None,
                scale: params.map(|p| p.scale_n.to_string()),
                blocks: None,
            },
            None,
        )),
        Ok(WitnessOutcome::Run(run)) => {
            if cert.support.is_empty() {
                return Ok((
                    WitnessReport {
                        outcome: "materialized".into(),
                        expanded_steps: Some("0".into()),
                        validated: Some(true),
                        scale: Some("0".into()),
                        blocks: Some(Vec::new()),
                    },
                    None,
                ));
            }
            let params =
                cutoff_core::analysis::ScalingParams::from_solution(&sys.net, &cert.solution);
            let scale = params.scale_n.clone();
            let start = sys.initial.scaled(&scale);
            let expected = sys.final_marking.scaled(&scale);
            let end = validate_rle_run(&sys.net, &start, &run)
                .map_err(|e| format!("materialized witness failed validation: {e}"))?;
            if end != expected {
                return Err("materialized witness ends at an unexpected marking".into());
            }
            Ok((
                WitnessReport {
                    outcome: "materialized".into(),
                    expanded_steps: Some(run.expanded_len().to_string()),
                    validated: Some(true),
                    scale: Some(scale.to_string()),
                    blocks: Some(witness_blocks(&sys.net, &run)),
                },
                Some(run),
            ))
        }
    }
}

/// Re-verify symmetric decisions: re-derive the graph facts and substitute
/// the parity bits.
fn verify_symmetric_decision(
    p: &SymmetricProtocol,
    d: &Decision,
    mode: Mode,
) -> Result<(), String> {
    use cutoff_core::symmetric::{good_states, protocol_graph};
    if !d.answer {
        return Ok(());
    }
    let graph = protocol_graph(p.protocol());
    let reach = graph.reachable_from(p.init);
    if !reach.contains(&p.fin) {
        return Err("yes answer but the final state is unreachable".into());
    }
    if let Some(path) = &d.graph_path {
        if path.first() != Some(&p.init) || path.last() != Some(&p.fin) {
            return Err("path endpoints are wrong".into());
        }
    }
    if mode == Mode::Symmetric && p.init != p.fin {
        let bits = d.f2_solution.as_ref().ok_or("missing parity bits")?;
        let net = protocol_to_net(p.protocol()).net;
        let good = good_states(p.protocol()).good;
        // Substitute: odd incidence parities must telescope, bad-state
        // transitions must stay unused.
        for (t, used) in bits.iter().enumerate() {
            if *used {
                let touches_bad = net
                    .pre_places(t)
                    .chain(net.post_places(t))
                    .any(|pl| !good.contains(&pl));
                if touches_bad {
                    return Err("parity witness uses a bad-state transition".into());
                }
            }
        }
        for q in 0..net.num_places() {
            let mut acc = 0u64;
            for (t, used) in bits.iter().enumerate() {
                if *used {
                    acc += net.incidence(q, t).unsigned_abs() % 2;
                }
            }
            let want = u64::from(q == p.init || q == p.fin);
            if acc % 2 != want {
                return Err(format!("parity row violated at state {q}"));
            }
        }
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> u8 {
    let start = Instant::now();
    let text = match load_input(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let parsed = match parse_input(&text) {
        Ok(p) => p,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let digest = input_digest(&text);

    let (witnesses, summary) = match &parsed {
        ParsedInput::Leader(lp) => {
            let (sys, ann) = leader_to_net(lp);
            let mut even = None;
            let mut odd = None;
            let mut yes_at = Vec::new();
            for n in 0..=args.n_max {
                let source = ann.initial_config(sys.net.num_places(), n);
                let target = ann.final_config(sys.net.num_places(), n);
                let r = cutoff_core::oracle::bfs_reach(
                    &sys.net,
                    &source,
                    cutoff_core::oracle::ReachTarget::Marking(&target),
                    args.budget,
                );
                if r.status.is_yes() {
                    yes_at.push(n);
                    if n % 2 == 0 {
                        even.get_or_insert(n);
                    } else {
                        odd.get_or_insert(n);
                    }
                }
            }
            let w = ParityWitnesses { even, odd, search_limit: args.n_max };
            let summary = format!(
                "follower counts reaching the final configuration: {yes_at:?} (searched 0..={})",
                args.n_max
            );
            (w, summary)
        }
        other => {
            let sys = match as_net_system(other) {
                Ok(s) => s,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let statuses = sweep_scaled_reachability(&sys, 1, args.n_max, args.budget);
            let w = semi_decide_cutoff(&sys, args.n_max, args.budget);
            let yes: Vec<u64> =
                statuses.iter().filter(|(_, s)| s.is_yes()).map(|(n, _)| *n).collect();
            let budget_hits =
                statuses.iter().filter(|(_, s)| matches!(s, ReachStatus::BudgetExceeded)).count();
            let mut summary = match min_consecutive_pair(&statuses) {
                Some(n) => format!(
                    "scales reaching the target: {yes:?}; consecutive pair at n={n}, so {} is a cut-off",
                    n * n
                ),
                None => format!("scales reaching the target: {yes:?}; no consecutive pair found"),
            };
            if budget_hits > 0 {
                summary.push_str(&format!(" ({budget_hits} scales hit the marking budget)"));
            }
            (w, summary)
        }
    };

    let report = Report {
        problem: "oracle".into(),
        input_digest: digest,
        answer: match (witnesses.even, witnesses.odd) {
            (Some(_), Some(_)) => "both-parities".into(),
            (None, None) => "no-witness".into(),
            _ => "one-parity".into(),
        },
        certificates: Certificates::default(),
        parity_witnesses: Some((&witnesses).into()),
        oracle_cross_check: Some(summary),
        witness: None,
        notes: Vec::new(),
        timing_ms: start.elapsed().as_millis(),
    };
    emit(&report, args.json);
    EXIT_OK
}

fn gen(cmd: GenCommand) -> u8 {
    let write = |path: &PathBuf, content: String| -> u8 {
        match std::fs::write(path, content) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(format!("cannot write `{}`: {e}", path.display()), EXIT_INPUT),
        }
    };
    match cmd {
        GenCommand::Cvp { circuit, out } => {
            let text = match std::fs::read_to_string(&circuit) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read `{}`: {e}", circuit.display()), EXIT_INPUT),
            };
            let c = match generators::parse_circuit(&text) {
                Ok(c) => c,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let p = generators::gen_cvp_protocol(&c);
            write(&out, serialize_input(&ParsedInput::Plain(p)))
        }
        GenCommand::ThreeSat { cnf, out } => {
            let text = match std::fs::read_to_string(&cnf) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read `{}`: {e}", cnf.display()), EXIT_INPUT),
            };
            let f = match generators::parse_cnf(&text) {
                Ok(f) => f,
                Err(e) => return fail(e, EXIT_INPUT),
            };
            let lp = generators::gen_3sat_leader_protocol(&f);
            write(&out, serialize_input(&ParsedInput::Leader(lp)))
        }
        GenCommand::Random { max_states, max_letters, max_rules, symmetric, seed, out } => {
            let params = generators::RandomProtocolParams {
                max_states,
                max_letters,
                max_rules,
                symmetric,
                seed,
            };
            let p = generators::gen_random_protocol(&params);
            let content = if symmetric {
                match SymmetricProtocol::new(p) {
                    Ok(sp) => serialize_input(&ParsedInput::Symmetric(sp)),
                    Err(e) => return fail(e, EXIT_INVARIANT),
                }
            } else {
                serialize_input(&ParsedInput::Plain(p))
            };
            write(&out, content)
        }
        GenCommand::Builtin { name, out } => match builtin_text(&name) {
            Some(content) => write(&out, content),
            None => fail(
                format!("unknown builtin `{name}`; available: {}", catalog::NAMES.join(", ")),
                EXIT_INPUT,
            ),
        },
    }
}

fn validate_run(args: ValidateRunArgs) -> u8 {
    let start = Instant::now();
    let text = match load_input(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let parsed = match parse_input(&text) {
        Ok(p) => p,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let sys = match as_net_system(&parsed) {
        Ok(s) => s,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let run_text = match std::fs::read_to_string(&args.run) {
        Ok(t) => t,
        Err(e) => return fail(format!("cannot read `{}`: {e}", args.run.display()), EXIT_INPUT),
    };
    let (start_marking, run) = match runfile::parse_run(&run_text, &sys.net, &sys.initial) {
        Ok(r) => r,
        Err(e) => return fail(e, EXIT_INPUT),
    };
    let mut notes = Vec::new();
    let answer = match validate_rle_run(&sys.net, &start_marking, &run) {
        Ok(end) => {
            let placed: Vec<String> = end
                .0
                .iter()
                .enumerate()
                .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
                .map(|(p, c)| format!("{} {}", sys.net.places[p], c))
                .collect();
            notes.push(format!("final marking: {}", placed.join(", ")));
            "valid".to_string()
        }
        Err(e) => {
            notes.push(e.to_string());
            "invalid".to_string()
        }
    };
    let report = Report {
        problem: "validate-run".into(),
        input_digest: input_digest(&text),
        answer,
        certificates: Certificates::default(),
        parity_witnesses: None,
        oracle_cross_check: None,
        witness: None,
        notes,
        timing_ms: start.elapsed().as_millis(),
    };
    emit(&report, args.json);
    EXIT_OK
}

/// Agreement suite over seeded random protocols: the polynomial deciders
/// against the explicit-state oracle, plus the symmetric specializations.
/// Instances run concurrently; per-instance results are deterministic.
fn corpus(args: CorpusArgs) -> u8 {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..args.count).map(|i| args.seed.wrapping_add(i)).collect();
    let n_max = args.n_max;
    let budget = args.budget;
    let results = par::map_slice(&seeds, |&seed| check_instance(seed, n_max, budget));

    let mut contradictions: Vec<String> = Vec::new();
    for r in &results {
        contradictions.extend(r.iter().cloned());
    }
    let answer = if contradictions.is_empty() { "consistent" } else { "contradiction" };
    let report = Report {
        problem: "corpus".into(),
        input_digest: format!("seed:{}+{}", args.seed, args.count),
        answer: answer.into(),
        certificates: Certificates::default(),
        parity_witnesses: None,
        oracle_cross_check: Some(format!(
            "{} instances checked, {} contradictions",
            results.len(),
            contradictions.len()
        )),
        witness: None,
        notes: contradictions.clone(),
        timing_ms: start.elapsed().as_millis(),
    };
    emit(&report, args.json);
    if contradictions.is_empty() {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    }
}

/// One corpus instance; returns human-readable contradiction descriptions.
fn check_instance(seed: u64, n_max: u64, budget: usize) -> Vec<String> {
    let mut problems = Vec::new();
    let symmetric = seed.is_multiple_of(2);
    let p = generators::gen_random_protocol(&generators::RandomProtocolParams {
        max_states: 4,
        max_letters: 2,
        max_rules: 6,
        symmetric,
        seed,
    });
    let sys = protocol_to_net(&p);
    let d = decide_cutoff(&sys);
    let statuses = sweep_scaled_reachability(&sys, 1, n_max, budget);
    let pair = min_consecutive_pair(&statuses);
    if pair.is_some() && !d.answer {
        problems.push(format!(
            "seed {seed}: oracle found a consecutive pair but the decision is no"
        ));
    }
    if let Err(e) = cutoff_core::analysis::verify_cutoff_decision(&sys, &d, true) {
        problems.push(format!("seed {seed}: certificate failed re-verification: {e}"));
    }
    if symmetric {
        if let Ok(sp) = SymmetricProtocol::new(p.clone()) {
            let special = decide_symmetric_cutoff(&sp);
            if special.answer != d.answer {
                problems.push(format!("seed {seed}: symmetric specialization disagrees"));
            }
            let bl = decide_symmetric_bounded_loss(&sp);
            let general_bl = decide_bounded_loss(&p);
            if bl.answer != general_bl.answer {
                problems.push(format!("seed {seed}: bounded-loss specialization disagrees"));
            }
        }
    }
    if d.answer && !matches!(d.integer_solution, Some(SolutionVector::Integer(_))) {
        problems.push(format!("seed {seed}: yes decision without an integer solution"));
    }
    problems
}
