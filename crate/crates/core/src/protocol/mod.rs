//! Dealer share generation and the two-party reconstruction protocols.

mod dealer;
mod engine;
mod transcript;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{Owner, QuantumError, QubitHandle};

pub use dealer::{qeshare_gen, qrshare_gen, qshare_gen, XorRoundValues};
pub use engine::{
    run_qep_fair, run_qmp_fair, run_qrmp_fair, run_trial, stream_rng, streams, Execution,
    ProtocolSetup, QepVariant, ScheduleSource, TrialResult,
};
pub use transcript::{
    parse_transcript_line, parse_transcript_lines, Actor, Event, EventAction, Transcript,
    TranscriptParseError, FINAL_SUB_ROUND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    P1,
    P2,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::P1, Party::P2];

    pub fn other(self) -> Party {
        match self {
            Party::P1 => Party::P2,
            Party::P2 => Party::P1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Party::P1 => 0,
            Party::P2 => 1,
        }
    }

    pub fn owner(self) -> Owner {
        match self {
            Party::P1 => Owner::P1,
            Party::P2 => Owner::P2,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::P1 => "P1",
            Party::P2 => "P2",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid millionaire inputs: need 1 <= i, j <= m, got i={i}, j={j}, m={m}")]
    InvalidMillionaireInputs { i: u32, j: u32, m: u32 },
    #[error("invalid embedded-xor inputs: x must be 1..=3 and y 1..=2, got x={x}, y={y}")]
    InvalidXorInputs { x: u8, y: u8 },
    #[error("gamma must lie strictly between 0 and 1, got {0}")]
    GammaOutOfRange(f64),
    #[error("invalid schedule: r={r}, d={d}, m={m}")]
    InvalidSchedule { r: u32, d: u32, m: u32 },
    #[error("share list for {party} has {found} rounds, expected {expected}")]
    MalformedShareList { party: Party, found: usize, expected: usize },
    #[error("both parties deviate; at most one party may be corrupted")]
    TwoCorruptedParties,
    #[error("strategy configuration: {0}")]
    Strategy(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Secrets of the millionaires' problem and the number of rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MillionaireInputs {
    pub i: u32,
    pub j: u32,
    pub m: u32,
}

impl MillionaireInputs {
    pub fn new(i: u32, j: u32, m: u32) -> Result<Self, ProtocolError> {
        let inputs = Self { i, j, m };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let Self { i, j, m } = *self;
        if i == 0 || j == 0 || i > m || j > m {
            return Err(ProtocolError::InvalidMillionaireInputs { i, j, m });
        }
        Ok(())
    }

    pub fn value(&self) -> u8 {
        eval_greater_than(self.i, self.j)
    }
}

/// Inputs of the embedded XOR: `x ∈ {1,2,3}` for P1, `y ∈ {1,2}` for P2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct XorInputs {
    pub x: u8,
    pub y: u8,
}

impl XorInputs {
    pub fn new(x: u8, y: u8) -> Result<Self, ProtocolError> {
        let inputs = Self { x, y };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(1..=3).contains(&self.x) || !(1..=2).contains(&self.y) {
            return Err(ProtocolError::InvalidXorInputs { x: self.x, y: self.y });
        }
        Ok(())
    }

    pub fn value(&self) -> u8 {
        eval_embedded_xor(self.x, self.y)
    }

    /// All six input pairs.
    pub fn all() -> impl Iterator<Item = XorInputs> {
        (1..=3).flat_map(|x| (1..=2).map(move |y| XorInputs { x, y }))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self { x: random_x(rng), y: random_y(rng) }
    }
}

pub fn random_x<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random_range(1..=3)
}

pub fn random_y<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random_range(1..=2)
}

/// The greater-than function: 1 iff `i > j`.
pub fn eval_greater_than(i: u32, j: u32) -> u8 {
    u8::from(i > j)
}

/// The embedded XOR table: 1 iff the indices differ, with row `x3` all ones.
pub fn eval_embedded_xor(x: u8, y: u8) -> u8 {
    u8::from(x != y)
}

/// Revelation round `r`, padding `d` and total rounds `m = r + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSchedule {
    pub r: u32,
    pub d: u32,
    pub m: u32,
    pub gamma: f64,
}

impl RoundSchedule {
    pub fn new(r: u32, d: u32, gamma: f64) -> Result<Self, ProtocolError> {
        check_gamma(gamma)?;
        if r == 0 || d == 0 {
            return Err(ProtocolError::InvalidSchedule { r, d, m: r + d });
        }
        Ok(Self { r, d, m: r + d, gamma })
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        check_gamma(self.gamma)?;
        if self.r == 0 || self.d == 0 || self.m != self.r + self.d {
            return Err(ProtocolError::InvalidSchedule { r: self.r, d: self.d, m: self.m });
        }
        Ok(())
    }
}

pub fn check_gamma(gamma: f64) -> Result<(), ProtocolError> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(ProtocolError::GammaOutOfRange(gamma))
    }
}

/// Draws `r` and `d` independently from the geometric law on `{1, 2, ...}`.
pub fn sample_schedule<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> Result<RoundSchedule, ProtocolError> {
    check_gamma(gamma)?;
    let geo = Geometric::new(gamma).map_err(|_| ProtocolError::GammaOutOfRange(gamma))?;
    let mut draw = || -> u32 { u32::try_from(geo.sample(rng)).unwrap_or(u32::MAX - 1).saturating_add(1) };
    let r = draw();
    let d = draw();
    RoundSchedule::new(r, d, gamma)
}

/// The two marked qubits a party holds for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharePair {
    pub first: QubitHandle,
    pub second: QubitHandle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareList {
    pub party: Party,
    pub rounds: Vec<SharePair>,
}

impl ShareList {
    pub fn m(&self) -> u32 {
        self.rounds.len() as u32
    }

    /// Round `l`'s pair, 1-based.
    pub fn round(&self, l: u32) -> SharePair {
        self.rounds[l as usize - 1]
    }

    pub fn handles(&self) -> impl Iterator<Item = QubitHandle> + '_ {
        self.rounds.iter().flat_map(|p| [p.first, p.second])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartyOutcome {
    Value(u8),
    Null,
    ForgeryReported,
    NotYetDecided,
}

impl PartyOutcome {
    pub fn value(self) -> Option<u8> {
        match self {
            PartyOutcome::Value(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PartyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyOutcome::Value(v) => write!(f, "{v}"),
            PartyOutcome::Null => f.write_str("null"),
            PartyOutcome::ForgeryReported => f.write_str("forgery"),
            PartyOutcome::NotYetDecided => f.write_str("undecided"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WorldOutcome {
    pub p1: PartyOutcome,
    pub p2: PartyOutcome,
}

impl WorldOutcome {
    pub fn new(p1: PartyOutcome, p2: PartyOutcome) -> Self {
        Self { p1, p2 }
    }

    pub fn values(a: u8, b: u8) -> Self {
        Self::new(PartyOutcome::Value(a), PartyOutcome::Value(b))
    }

    pub fn get(&self, party: Party) -> PartyOutcome {
        match party {
            Party::P1 => self.p1,
            Party::P2 => self.p2,
        }
    }

    pub fn set(&mut self, party: Party, outcome: PartyOutcome) {
        match party {
            Party::P1 => self.p1 = outcome,
            Party::P2 => self.p2 = outcome,
        }
    }
}

impl fmt::Display for WorldOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p1, self.p2)
    }
}
