//! Deviation strategies for a corrupted party.
//!
//! A strategy is an immutable plan. Before each trial it is [`arm`]ed with the
//! trial's strategy stream, which fixes every random choice. The engine then
//! consults [`decide_action`] at each of the party's send points.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::protocol::{Event, Party};
use crate::quantum::PureQubitSpec;

/// A round given explicitly or drawn uniformly from `1..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RoundRepr", into = "RoundRepr")]
pub enum RoundChoice {
    Fixed(u32),
    UniformRandom,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RoundRepr {
    Number(u32),
    Word(String),
}

impl TryFrom<RoundRepr> for RoundChoice {
    type Error = String;
    fn try_from(r: RoundRepr) -> Result<Self, String> {
        match r {
            RoundRepr::Number(0) => Err("rounds are numbered from 1".into()),
            RoundRepr::Number(n) => Ok(RoundChoice::Fixed(n)),
            RoundRepr::Word(w) if w == "uniform" || w == "uniform_random" => Ok(RoundChoice::UniformRandom),
            RoundRepr::Word(w) => Err(format!("unknown round {w:?}; use a number or \"uniform\"")),
        }
    }
}

impl From<RoundChoice> for RoundRepr {
    fn from(r: RoundChoice) -> Self {
        match r {
            RoundChoice::Fixed(n) => RoundRepr::Number(n),
            RoundChoice::UniformRandom => RoundRepr::Word("uniform".into()),
        }
    }
}

impl RoundChoice {
    fn resolve<R: Rng + ?Sized>(self, m: u32, rng: &mut R) -> u32 {
        match self {
            RoundChoice::Fixed(l) => l,
            RoundChoice::UniformRandom => rng.random_range(1..=m.max(1)),
        }
    }
}

impl fmt::Display for RoundChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundChoice::Fixed(l) => write!(f, "{l}"),
            RoundChoice::UniformRandom => f.write_str("uniform"),
        }
    }
}

/// The qubit a forger sends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub enum ForgeSpec {
    Fixed(PureQubitSpec<f64>),
    HaarRandom,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(&self) -> Complex<f64> {
        match *self {
            Amplitude::Real(re) => Complex::new(re, 0.0),
            Amplitude::Complex([re, im]) => Complex::new(re, im),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpecRepr {
    Word(String),
    Amplitudes { alpha: Amplitude, beta: Amplitude },
}

impl TryFrom<SpecRepr> for ForgeSpec {
    type Error = String;
    fn try_from(r: SpecRepr) -> Result<Self, String> {
        match r {
            SpecRepr::Word(w) if w == "haar" || w == "haar_random" => Ok(ForgeSpec::HaarRandom),
            SpecRepr::Word(w) => Err(format!("unknown forging spec {w:?}; use amplitudes or \"haar\"")),
            SpecRepr::Amplitudes { alpha, beta } => {
                let spec = PureQubitSpec::new(alpha.value(), beta.value());
                if spec.is_normalized() {
                    Ok(ForgeSpec::Fixed(spec))
                } else {
                    Err(format!("forging amplitudes are not normalized (|α|²+|β|² = {})", spec.norm_sqr()))
                }
            }
        }
    }
}

impl From<ForgeSpec> for SpecRepr {
    fn from(s: ForgeSpec) -> Self {
        match s {
            ForgeSpec::HaarRandom => SpecRepr::Word("haar".into()),
            ForgeSpec::Fixed(p) => {
                let amp = |z: Complex<f64>| {
                    if z.im == 0.0 {
                        Amplitude::Real(z.re)
                    } else {
                        Amplitude::Complex([z.re, z.im])
                    }
                };
                SpecRepr::Amplitudes { alpha: amp(p.alpha), beta: amp(p.beta) }
            }
        }
    }
}

impl fmt::Display for ForgeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForgeSpec::HaarRandom => f.write_str("haar"),
            ForgeSpec::Fixed(p) => write!(f, "({}, {})", p.alpha, p.beta),
        }
    }
}

/// Haar-random single-qubit pure state.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> PureQubitSpec<f64> {
    let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    PureQubitSpec::new(Complex::new(g[0] / n, g[1] / n), Complex::new(g[2] / n, g[3] / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    #[default]
    Honest,
    ForgeArbitraryQubit { round: RoundChoice, spec: ForgeSpec },
    SwapShares { round: RoundChoice },
    AbortAt { round: RoundChoice },
    AbortAtRevelation,
    AbortIfCertain,
}

impl AdversaryStrategy {
    pub fn is_honest(&self) -> bool {
        matches!(self, AdversaryStrategy::Honest)
    }

    pub fn is_forging(&self) -> bool {
        matches!(self, AdversaryStrategy::ForgeArbitraryQubit { .. } | AdversaryStrategy::SwapShares { .. })
    }

    pub fn validate(&self) -> Result<(), String> {
        let round_ok = |r: &RoundChoice| match r {
            RoundChoice::Fixed(0) => Err("rounds are numbered from 1".to_string()),
            _ => Ok(()),
        };
        match self {
            AdversaryStrategy::ForgeArbitraryQubit { round, spec } => {
                round_ok(round)?;
                if let ForgeSpec::Fixed(p) = spec {
                    if !p.is_normalized() {
                        return Err("forging amplitudes are not normalized".into());
                    }
                }
                Ok(())
            }
            AdversaryStrategy::SwapShares { round } | AdversaryStrategy::AbortAt { round } => round_ok(round),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryStrategy::Honest => f.write_str("honest"),
            AdversaryStrategy::ForgeArbitraryQubit { round, spec } => write!(f, "forge(round={round}, spec={spec})"),
            AdversaryStrategy::SwapShares { round } => write!(f, "swap(round={round})"),
            AdversaryStrategy::AbortAt { round } => write!(f, "abort(round={round})"),
            AdversaryStrategy::AbortAtRevelation => f.write_str("abort-at-revelation"),
            AdversaryStrategy::AbortIfCertain => f.write_str("abort-if-certain"),
        }
    }
}

/// A party's own private input as seen by its strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OwnInput {
    Millionaire { secret: u32 },
    XorP1 { x: u8 },
    XorP2 { y: u8 },
}

/// Everything a party may base a decision on.
#[derive(Debug, Clone, Serialize)]
pub struct PartyView<'a> {
    pub party: Party,
    pub own_input: OwnInput,
    pub m: u32,
    pub round: u32,
    /// The round in which this party's own output is revealed, when it follows
    /// from its own input.
    pub revelation_round: Option<u32>,
    pub events: &'a [Event],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    SendHonest,
    SendForged(PureQubitSpec<f64>),
    SendSwapped { from_round: u32 },
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Plan {
    Honest,
    Forge { round: u32, spec: PureQubitSpec<f64> },
    Swap { round: u32, partner: u32 },
    Abort { round: u32 },
    AbortAtRevelation,
    AbortIfCertain,
}

/// A strategy with its per-trial random choices fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmedStrategy {
    pub strategy: AdversaryStrategy,
    plan: Plan,
}

impl ArmedStrategy {
    pub fn honest() -> Self {
        Self { strategy: AdversaryStrategy::Honest, plan: Plan::Honest }
    }

    pub fn is_honest(&self) -> bool {
        self.strategy.is_honest()
    }
}

/// Fixes the random choices of `strategy` for one run with `m` rounds.
pub fn arm<R: Rng + ?Sized>(strategy: &AdversaryStrategy, m: u32, rng: &mut R) -> ArmedStrategy {
    let plan = match *strategy {
        AdversaryStrategy::Honest => Plan::Honest,
        AdversaryStrategy::ForgeArbitraryQubit { round, spec } => {
            let round = round.resolve(m, rng);
            let spec = match spec {
                ForgeSpec::Fixed(p) => p,
                ForgeSpec::HaarRandom => haar_qubit(rng),
            };
            Plan::Forge { round, spec }
        }
        AdversaryStrategy::SwapShares { round } => {
            let round = round.resolve(m, rng);
            if m < 2 || round > m {
                Plan::Honest
            } else {
                let k = rng.random_range(1..m);
                let partner = if k >= round { k + 1 } else { k };
                Plan::Swap { round, partner }
            }
        }
        AdversaryStrategy::AbortAt { round } => Plan::Abort { round: round.resolve(m, rng) },
        AdversaryStrategy::AbortAtRevelation => Plan::AbortAtRevelation,
        AdversaryStrategy::AbortIfCertain => Plan::AbortIfCertain,
    };
    ArmedStrategy { strategy: *strategy, plan }
}

/// The action for the party's send point in `view.round`.
pub fn decide_action(armed: &ArmedStrategy, view: &PartyView<'_>) -> Action {
    let l = view.round;
    match armed.plan {
        Plan::Honest => Action::SendHonest,
        Plan::Forge { round, spec } if round == l => Action::SendForged(spec),
        Plan::Swap { round, partner } if round == l => Action::SendSwapped { from_round: partner },
        Plan::Swap { round, partner } if partner == l => Action::SendSwapped { from_round: round },
        Plan::Abort { round } if round == l => Action::Abort,
        Plan::AbortAtRevelation => {
            let target = match (view.revelation_round, view.party) {
                (Some(i), Party::P1) => i,
                (Some(j), Party::P2) => j + 1,
                // The revelation round is hidden: commit at the first round.
                (None, _) => 1,
            };
            if target == l {
                Action::Abort
            } else {
                Action::SendHonest
            }
        }
        Plan::AbortIfCertain => match view.own_input {
            OwnInput::XorP1 { x: 3 } if l == 1 => Action::Abort,
            _ => Action::SendHonest,
        },
        _ => Action::SendHonest,
    }
}

/// The round whose sent-slot qubit is transmitted at round `round` under a
/// swap plan exchanging `round` with `partner`.
pub fn swap_effect(m: u32, round: u32, partner: u32, at: u32) -> u32 {
    if m < 2 || partner == round {
        at
    } else if at == round {
        partner
    } else if at == partner {
        round
    } else {
        at
    }
}
