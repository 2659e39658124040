//! Event log of one protocol run and its line-oriented text form.
//!
//! One event per line: `run_id,round,sub_round,actor,action,outcome`.
//! Sub-round 1 is P2's send followed by P1's measurement, sub-round 2 is P1's
//! send followed by P2's measurement, and [`FINAL_SUB_ROUND`] carries the
//! outputs each party ends with.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Party;
use crate::quantum::BellLabel;

pub type Actor = Party;

/// Sub-round index used for terminal output events.
pub const FINAL_SUB_ROUND: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventAction {
    Sent,
    SentForged,
    SentSwapped,
    Measured(BellLabel),
    Aborted,
    /// Whether the abort round was the revelation round, told after the abort.
    RevelationDisclosed(bool),
    ReportedForgery,
    ConcludedNull,
    ConcludedValue(u8),
}

impl EventAction {
    fn name(&self) -> &'static str {
        match self {
            EventAction::Sent => "sent",
            EventAction::SentForged => "sent-forged",
            EventAction::SentSwapped => "sent-swapped",
            EventAction::Measured(_) => "measured",
            EventAction::Aborted => "aborted",
            EventAction::RevelationDisclosed(_) => "revelation-disclosed",
            EventAction::ReportedForgery => "reported-forgery",
            EventAction::ConcludedNull => "concluded-null",
            EventAction::ConcludedValue(_) => "concluded-value",
        }
    }

    fn outcome_label(&self) -> String {
        match self {
            EventAction::Measured(l) => l.to_string(),
            EventAction::RevelationDisclosed(b) => b.to_string(),
            EventAction::ConcludedValue(v) => v.to_string(),
            EventAction::ConcludedNull => "null".to_string(),
            _ => "-".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    pub sub_round: u8,
    pub actor: Actor,
    pub action: EventAction,
}

impl Event {
    pub fn to_line(&self, run_id: u64) -> String {
        format!(
            "{run_id},{},{},{},{},{}",
            self.round,
            self.sub_round,
            self.actor,
            self.action.name(),
            self.action.outcome_label()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: u32, sub_round: u8, actor: Actor, action: EventAction) {
        self.events.push(Event { round, sub_round, actor, action });
    }

    pub fn events_of(&self, party: Party) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.actor == party)
    }

    /// Rounds are non-decreasing, and within a round sub-rounds are too.
    pub fn is_ordered(&self) -> bool {
        self.events.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.round, a.sub_round) <= (b.round, b.sub_round) || b.sub_round == FINAL_SUB_ROUND
        })
    }

    /// First round at which `party` concluded a value, if any.
    pub fn first_value_round(&self, party: Party) -> Option<u32> {
        self.events_of(party)
            .find(|e| matches!(e.action, EventAction::ConcludedValue(_)) && e.sub_round != FINAL_SUB_ROUND)
            .map(|e| e.round)
    }

    pub fn write_lines(&self, run_id: u64, out: &mut String) {
        for e in &self.events {
            let _ = writeln!(out, "{}", e.to_line(run_id));
        }
    }

    pub fn to_lines(&self, run_id: u64) -> String {
        let mut out = String::new();
        self.write_lines(run_id, &mut out);
        out
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lines(0))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad transcript line {line:?}: {reason}")]
pub struct TranscriptParseError {
    pub line: String,
    pub reason: String,
}

pub fn parse_transcript_line(line: &str) -> Result<(u64, Event), TranscriptParseError> {
    let fail = |reason: &str| TranscriptParseError { line: line.to_string(), reason: reason.to_string() };
    let fields: Vec<&str> = line.trim_end().split(',').collect();
    let [run, round, sub, actor, action, outcome] = fields[..] else {
        return Err(fail("expected 6 comma-separated fields"));
    };
    let run_id = run.parse().map_err(|_| fail("run id"))?;
    let round = round.parse().map_err(|_| fail("round"))?;
    let sub_round = sub.parse().map_err(|_| fail("sub-round"))?;
    let actor = match actor {
        "P1" => Party::P1,
        "P2" => Party::P2,
        _ => return Err(fail("actor")),
    };
    let label = || -> Result<BellLabel, TranscriptParseError> {
        outcome
            .strip_prefix('G')
            .and_then(|k| k.parse().ok())
            .and_then(BellLabel::from_index)
            .ok_or_else(|| fail("bell label"))
    };
    let dash = |a: EventAction| if outcome == "-" { Ok(a) } else { Err(fail("expected '-' outcome")) };
    let action = match action {
        "sent" => dash(EventAction::Sent)?,
        "sent-forged" => dash(EventAction::SentForged)?,
        "sent-swapped" => dash(EventAction::SentSwapped)?,
        "aborted" => dash(EventAction::Aborted)?,
        "reported-forgery" => dash(EventAction::ReportedForgery)?,
        "measured" => EventAction::Measured(label()?),
        "revelation-disclosed" => EventAction::RevelationDisclosed(outcome.parse().map_err(|_| fail("boolean"))?),
        "concluded-null" if outcome == "null" => EventAction::ConcludedNull,
        "concluded-value" => match outcome {
            "0" => EventAction::ConcludedValue(0),
            "1" => EventAction::ConcludedValue(1),
            _ => return Err(fail("bit")),
        },
        _ => return Err(fail("action")),
    };
    Ok((run_id, Event { round, sub_round, actor, action }))
}

/// Parses every non-empty line.
pub fn parse_transcript_lines(text: &str) -> Result<Vec<(u64, Event)>, TranscriptParseError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(parse_transcript_line).collect()
}
