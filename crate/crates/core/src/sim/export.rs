//! Line-delimited trace export.
//!
//! One JSON object per message (`round`, `kind`, `sender`, `receiver`,
//! `payload_bits`), one per status change (`round`, `kind = "Transition"`,
//! `agent`, `status`), then a summary (`outcome`, `winner`, `rounds`,
//! `max_message_bits`, `flags`).

use std::io::{self, Write};

use serde::Serialize;

use super::classify::GoodExecutionFlags;
use super::trace::Trace;
use crate::protocol::Status;

#[derive(Serialize)]
struct MessageRecord<'a> {
    round: u32,
    kind: &'a str,
    sender: u32,
    receiver: u32,
    payload_bits: u64,
}

#[derive(Serialize)]
struct TransitionRecord {
    round: u32,
    kind: &'static str,
    agent: u32,
    status: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceSummary {
    pub outcome: String,
    pub winner: Option<u32>,
    pub rounds: u32,
    pub max_message_bits: u64,
    pub flags: GoodExecutionFlags,
}

impl TraceSummary {
    pub fn of(trace: &Trace, flags: GoodExecutionFlags) -> Self {
        TraceSummary {
            outcome: trace.outcome.to_string(),
            winner: trace.winner.map(|w| w.0),
            rounds: trace.stats.rounds_elapsed,
            max_message_bits: trace.stats.max_message_bits,
            flags,
        }
    }
}

fn status_label(s: Status) -> String {
    match s {
        Status::Faulty => "Faulty".into(),
        Status::Active => "Active".into(),
        Status::Failed => "Failed".into(),
        Status::Decided(c) => format!("Decided({c})"),
    }
}

pub fn write_jsonl<W: Write>(trace: &Trace, flags: GoodExecutionFlags, mut out: W) -> io::Result<()> {
    for m in &trace.messages {
        let rec = MessageRecord {
            round: m.round,
            kind: m.kind.as_str(),
            sender: m.sender.0,
            receiver: m.receiver.0,
            payload_bits: m.payload_bits,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    for t in &trace.transitions {
        let rec =
            TransitionRecord { round: t.round, kind: "Transition", agent: t.agent.0, status: status_label(t.status) };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &TraceSummary::of(trace, flags))?;
    out.write_all(b"\n")
}

/// Message table as CSV; the summary goes in a trailing comment line.
pub fn write_csv<W: Write>(trace: &Trace, flags: GoodExecutionFlags, mut out: W) -> io::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["round", "kind", "sender", "receiver", "payload_bits"])?;
        for m in &trace.messages {
            w.write_record([
                m.round.to_string(),
                m.kind.as_str().to_string(),
                m.sender.0.to_string(),
                m.receiver.0.to_string(),
                m.payload_bits.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let summary = serde_json::to_string(&TraceSummary::of(trace, flags))?;
    writeln!(out, "# summary {summary}")
}
