//! The `dalmas` command line: run, audit and norm inspection.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use dalmas_core::engine::{AuditReport, Divergence};
use dalmas_core::positions::maxiconjunction_table;
use dalmas_core::waste::{probe_universe, WasteAction};
use dalmas_core::GcSystem;

use crate::error::{Error, Result};
use crate::scenario::{Overrides, Scenario, PROBE_SIDE};
use crate::trace::{parse_trace, recorded_events, state_digest, write_trace};

#[derive(Debug, Parser)]
#[command(name = "dalmas", version, about = "Run and audit norm-governed waste-world simulations")]
pub struct Cli {
    /// Apply the disjunctive/conjunctive prohibition rules to non-elementary norms.
    #[arg(long, global = true)]
    pub extended_rules: bool,

    /// Keep only the minimal norms of the scenario's normative system.
    #[arg(long, global = true)]
    pub minimal_only: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of events; overrides `engine.k`.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Re-derive every event of a trace and report divergences.
    Audit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Inspect the scenario's normative system.
    Norms {
        #[command(subcommand)]
        what: NormsCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum NormsCommand {
    /// Print the minimal norms.
    Min {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Check the condition orderings, the consequence structure and connectivity.
    Check {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print the seven normative positions with their sign patterns.
    Table {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

/// Exit status for a successful command.
pub const EXIT_OK: u8 = 0;
/// Exit status when an audit finds a divergence or a corrupt trace.
pub const EXIT_AUDIT: u8 = 2;

/// Runs one command; diagnostics go to `err`, results to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let overrides = Overrides { k: None, extended_rules: cli.extended_rules, minimal_only: cli.minimal_only };
    let result = match &cli.command {
        Command::Run { scenario, out: path, k } => run(scenario, path, Overrides { k: *k, ..overrides }, out),
        Command::Audit { trace, scenario } => audit(trace, scenario, overrides, out),
        Command::Norms { what } => norms(what, overrides, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

fn run(scenario_path: &Path, out_path: &Path, overrides: Overrides, out: &mut dyn Write) -> Result<u8> {
    let scenario = Scenario::load(scenario_path)?;
    let session = scenario.session(overrides)?;
    let trace = session.engine.run(session.initial.clone(), session.k)?;

    let file = std::fs::File::create(out_path).map_err(io_error(out_path))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, &session, &scenario.name, &trace).map_err(io_error(out_path))?;
    w.flush().map_err(io_error(out_path))?;

    let last = &trace.phi(trace.events.len()).expect("final situation").state;
    let _ = writeln!(
        out,
        "{}: {} events, {} deadlocks, total collected {}",
        scenario.name,
        trace.events.len(),
        trace.deadlocks(),
        last.total_collected()
    );
    for (&a, v) in last.collected_all() {
        let _ = writeln!(out, "  {} collected {v}", session.agent_name(a));
    }
    let _ = writeln!(out, "trace written to {}", out_path.display());
    Ok(EXIT_OK)
}

fn audit(trace_path: &Path, scenario_path: &Path, overrides: Overrides, out: &mut dyn Write) -> Result<u8> {
    let scenario = Scenario::load(scenario_path)?;
    let session = scenario.session(overrides)?;
    let text = std::fs::read_to_string(trace_path).map_err(io_error(trace_path))?;
    let (initial, events) = parse_trace(&text)?;
    if session.agent_id(&initial.mover) != Some(session.initial.mover) {
        return Err(Error::Trace {
            line: 1,
            message: format!("initial mover {:?} does not match the scenario", initial.mover),
        });
    }
    let recorded = recorded_events(&session, &events)?;
    let report = session.engine.audit(&session.initial, &initial.digest, &recorded, state_digest)?;
    print_audit(&report, recorded.len(), out);
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_AUDIT })
}

fn action_list(actions: &[WasteAction]) -> String {
    let names: Vec<&str> = actions.iter().map(|a| a.name()).collect();
    format!("{{{}}}", names.join(", "))
}

fn describe(d: &Divergence<WasteAction>) -> String {
    match d {
        Divergence::MoverMismatch { t, expected, found } => {
            format!("t={t}: mover should be {expected}, trace has {found}")
        }
        Divergence::NotInChoiceSet { t, choice, found } => {
            format!("t={t}: expected Γ = {}, found {}", action_list(choice), found.name())
        }
        Divergence::TieBreak { t, expected, found } => {
            format!("t={t}: tie-break picks {}, found {}", expected.map_or("nothing", |a| a.name()), found.name())
        }
        Divergence::UnwarrantedDeadlock { t, choice } => {
            format!("t={t}: expected Γ = {}, found a deadlock pass", action_list(choice))
        }
        Divergence::DeadlockFlag { t, recorded } => {
            format!("t={t}: deadlock flag {recorded} disagrees with the chosen action")
        }
    }
}

fn print_audit(report: &AuditReport<WasteAction>, total: usize, out: &mut dyn Write) {
    if let Some(d) = report.first_divergence() {
        let _ = writeln!(out, "first divergence at {}", describe(d));
        let mut per_event: Vec<(usize, usize)> = Vec::new();
        for d in &report.divergences {
            match per_event.last_mut() {
                Some((t, n)) if *t == d.t() => *n += 1,
                _ => per_event.push((d.t(), 1)),
            }
        }
        let _ = writeln!(out, "{} of {} events diverge", per_event.len(), total);
        for (t, n) in per_event {
            let _ = writeln!(out, "  t={t}: {n} divergence(s)");
        }
    }
    if let Some(c) = &report.corruption {
        let _ = writeln!(out, "corrupt trace at t={}: {}", c.t, c.message);
    }
    if report.is_clean() {
        let _ = writeln!(out, "audit clean: {} events", report.events_checked);
    }
}

fn gc_system(scenario_path: &Path, overrides: Overrides) -> Result<GcSystem> {
    let scenario = Scenario::load(scenario_path)?;
    let session = scenario.session(overrides)?;
    let norms = if overrides.minimal_only || scenario.engine.minimal_only {
        session.engine.norms().to_vec()
    } else {
        session.norms
    };
    Ok(GcSystem::build(norms, &probe_universe(PROBE_SIDE, PROBE_SIDE, 2))?)
}

fn norms(what: &NormsCommand, overrides: Overrides, out: &mut dyn Write) -> Result<u8> {
    match what {
        NormsCommand::Min { scenario } => {
            let gc = gc_system(scenario, overrides)?;
            for n in gc.minimal_norms() {
                let _ = writeln!(out, "{}\t{n}", n.id);
            }
            Ok(EXIT_OK)
        }
        NormsCommand::Check { scenario } => {
            let gc = gc_system(scenario, overrides)?;
            let universe = probe_universe(PROBE_SIDE, PROBE_SIDE, 2);
            let ground = gc.ground_bqo_report(&universe)?;
            let consequence = gc.consequence_npcis_report()?;
            let connectivity = gc.check_connectivity();
            let closure = gc.check_joining_closure();
            let status = |ok: bool| if ok { "ok" } else { "FAILED" };

            let _ = writeln!(out, "ground Bqo over {} conditions: {}", ground.carrier_size, status(ground.is_ok()));
            for v in &ground.violations {
                let _ = writeln!(out, "  {v:?}");
            }
            let _ = writeln!(
                out,
                "consequence np-cis over {} base classes: {}",
                gc.vocabulary().len(),
                status(consequence.is_ok())
            );
            for v in &consequence.violations {
                let _ = writeln!(out, "  {v:?}");
            }
            for v in &consequence.bqo.violations {
                let _ = writeln!(out, "  {v:?}");
            }
            let _ =
                writeln!(out, "connectivity of {} norms: {}", gc.norms().len(), status(connectivity.is_connected()));
            for j in connectivity.failures() {
                let _ = writeln!(out, "  no minimal norm below {}", gc.norms()[j].id);
            }
            let _ = writeln!(
                out,
                "joining closure of the listed norms: {} missing joins{} (the list generates its closure)",
                closure.violations.len(),
                if closure.truncated { ", subsets truncated" } else { "" }
            );
            let ok = ground.is_ok() && consequence.is_ok() && connectivity.is_connected();
            Ok(if ok { EXIT_OK } else { 1 })
        }
        NormsCommand::Table { scenario } => {
            if let Some(path) = scenario {
                Scenario::load(path)?;
            }
            for row in maxiconjunction_table() {
                let _ = writeln!(out, "{}\t{}\t{}", row.position, row.signs, row.abbreviation.unwrap_or(""));
            }
            Ok(EXIT_OK)
        }
    }
}
