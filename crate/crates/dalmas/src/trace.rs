//! Line-delimited JSON traces: one initial record, then one record per event.

use std::io::Write;

use dalmas_core::engine::{Event, RecordedEvent};
use dalmas_core::waste::{GridState, WasteAction};
use dalmas_core::{Situation, Trace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scenario::Session;

pub const SCHEMA: u32 = 1;

/// First 16 hex digits of the SHA-256 of the state's canonical bytes.
pub fn state_digest(state: &GridState) -> String {
    let hash = Sha256::digest(state.canonical_bytes());
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Initial(InitialRecord),
    Event(EventRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialRecord {
    pub schema: u32,
    pub scenario: String,
    pub t: usize,
    pub mover: String,
    pub agents: Vec<AgentRecord>,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub schema: u32,
    pub t: usize,
    pub mover: String,
    pub feasible: Vec<String>,
    pub prohibited: Vec<ProhibitedRecord>,
    pub permissible: Vec<String>,
    pub scores: Vec<ScoreRecord>,
    pub choice: Vec<String>,
    /// `null` on deadlock.
    pub chosen: Option<String>,
    pub deadlock: bool,
    pub next_mover: String,
    pub agents: Vec<AgentRecord>,
    pub digest: String,
}

/// Position and collected amount of one agent after the event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRecord {
    pub id: String,
    pub at: [i32; 2],
    pub collected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProhibitedRecord {
    pub action: String,
    pub witnesses: Vec<WitnessRecord>,
}

/// One prohibiting (norm, tuple) pair. `type` and `e` list every typed atom
/// whose elimination test held, in consequence order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRecord {
    pub norm: String,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub tuple: Vec<String>,
    pub action: String,
    pub e: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub action: String,
    pub score: f64,
}

fn names(actions: &[WasteAction]) -> Vec<String> {
    actions.iter().map(|a| a.name().to_string()).collect()
}

fn agents(session: &Session, state: &GridState) -> Vec<AgentRecord> {
    state
        .positions()
        .iter()
        .map(|(&a, c)| AgentRecord {
            id: session.agent_name(a).to_string(),
            at: [c.x, c.y],
            collected: state.collected(a),
        })
        .collect()
}

pub fn initial_record(session: &Session, scenario: &str, initial: &Situation<GridState>) -> InitialRecord {
    InitialRecord {
        schema: SCHEMA,
        scenario: scenario.to_string(),
        t: 0,
        mover: session.agent_name(initial.mover).to_string(),
        agents: agents(session, &initial.state),
        digest: state_digest(&initial.state),
    }
}

pub fn event_record(session: &Session, e: &Event<GridState, WasteAction>) -> EventRecord {
    let name = |a| session.agent_name(a).to_string();
    EventRecord {
        schema: SCHEMA,
        t: e.t,
        mover: name(e.mover),
        feasible: names(&e.verdict.feasible),
        prohibited: e
            .verdict
            .prohibited
            .iter()
            .map(|(a, ws)| ProhibitedRecord {
                action: a.name().to_string(),
                witnesses: ws
                    .iter()
                    .map(|w| WitnessRecord {
                        norm: w.norm_id.clone(),
                        types: w.fired.iter().map(|f| f.position.to_string()).collect(),
                        tuple: w.tuple.iter().map(|&a| name(a)).collect(),
                        action: w.action.name().to_string(),
                        e: w.fired.iter().map(|f| f.op.to_string()).collect(),
                    })
                    .collect(),
            })
            .collect(),
        permissible: names(&e.verdict.permissible),
        scores: e.scores.iter().map(|(a, s)| ScoreRecord { action: a.name().to_string(), score: *s }).collect(),
        choice: names(&e.choice),
        chosen: e.chosen.map(|a| a.name().to_string()),
        deadlock: e.deadlock,
        next_mover: name(e.next.mover),
        agents: agents(session, &e.next.state),
        digest: state_digest(&e.next.state),
    }
}

/// Writes the initial record and every event, one JSON object per line.
pub fn write_trace(
    out: &mut impl Write,
    session: &Session,
    scenario: &str,
    trace: &Trace<GridState, WasteAction>,
) -> std::io::Result<()> {
    let mut line = |r: &Record| -> std::io::Result<()> {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")
    };
    line(&Record::Initial(initial_record(session, scenario, &trace.initial)))?;
    for e in &trace.events {
        line(&Record::Event(event_record(session, e)))?;
    }
    Ok(())
}

/// Parses a trace file: an initial record followed by event records.
pub fn parse_trace(text: &str) -> Result<(InitialRecord, Vec<EventRecord>)> {
    let mut initial = None;
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(raw).map_err(|e| Error::Trace { line, message: e.to_string() })?;
        let schema = match &record {
            Record::Initial(r) => r.schema,
            Record::Event(r) => r.schema,
        };
        if schema != SCHEMA {
            return Err(Error::Trace {
                line,
                message: format!("schema {schema} is not supported (expected {SCHEMA})"),
            });
        }
        match (record, initial.is_some()) {
            (Record::Initial(r), false) => initial = Some(r),
            (Record::Event(r), true) => events.push(r),
            (Record::Initial(_), true) => return Err(Error::Trace { line, message: "second initial record".into() }),
            (Record::Event(_), false) => {
                return Err(Error::Trace { line, message: "event before the initial record".into() })
            }
        }
    }
    let initial = initial.ok_or(Error::Trace { line: 1, message: "empty trace".into() })?;
    Ok((initial, events))
}

/// The fields the audit replays, with names resolved against the session.
pub fn recorded_events(session: &Session, events: &[EventRecord]) -> Result<Vec<RecordedEvent<WasteAction, String>>> {
    events
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            let mover = session
                .agent_id(&r.mover)
                .ok_or_else(|| Error::Trace { line, message: format!("unknown agent {:?}", r.mover) })?;
            let chosen = match &r.chosen {
                None => None,
                Some(n) => Some(
                    WasteAction::from_name(n)
                        .ok_or_else(|| Error::Trace { line, message: format!("unknown action {n:?}") })?,
                ),
            };
            Ok(RecordedEvent { t: r.t, mover, chosen, deadlock: r.deadlock, digest: r.digest.clone() })
        })
        .collect()
}
