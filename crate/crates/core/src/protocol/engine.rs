//! Round-driven reconstruction for all four protocols.
//!
//! Every round has two sub-rounds. In the first, P2 sends its first-slot qubit
//! and P1 measures it against its own first-slot qubit. In the second, P1
//! sends its second-slot qubit and P2 measures it (as the left factor) against
//! its own second-slot qubit. A party's decision for round `l` is taken at the
//! start of the round and acted on at its send point, so an aborting P1 has
//! already measured round `l` while an aborting P2 has not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    eval_embedded_xor, qeshare_gen, qrshare_gen, qshare_gen, random_x, random_y, sample_schedule,
    Event, EventAction, MillionaireInputs, Party, PartyOutcome, ProtocolError, RoundSchedule,
    ShareList, Transcript, WorldOutcome, XorInputs, FINAL_SUB_ROUND,
};
use crate::adversary::{arm, decide_action, Action, AdversaryStrategy, ArmedStrategy, OwnInput, PartyView};
use crate::quantum::{BellLabel, QubitHandle, QubitMeta, QuantumHeap, Slot};
use crate::scalar::Real;

/// Stream indices carved out of one trial seed.
pub mod streams {
    pub const HEAP: u64 = 0;
    pub const DEALER: u64 = 1;
    pub const STRATEGY: u64 = 2;
    pub const PARTY: u64 = 3;
    pub const EXPERIMENT: u64 = 4;
    pub const IDEAL: u64 = 5;
}

/// Independent stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QepVariant {
    Qep,
    Qep2,
}

/// Fixed schedule or the parameter to draw one from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleSource {
    Sampled { gamma: f64 },
    Fixed(RoundSchedule),
}

impl ScheduleSource {
    pub fn gamma(&self) -> f64 {
        match self {
            ScheduleSource::Sampled { gamma } => *gamma,
            ScheduleSource::Fixed(s) => s.gamma,
        }
    }

    fn resolve<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RoundSchedule, ProtocolError> {
        match self {
            ScheduleSource::Sampled { gamma } => sample_schedule(*gamma, rng),
            ScheduleSource::Fixed(s) => {
                s.validate()?;
                Ok(*s)
            }
        }
    }
}

/// A protocol with concrete inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProtocolSetup {
    Qmp { inputs: MillionaireInputs },
    Qrmp { i: u32, j: u32, schedule: ScheduleSource },
    Qep { inputs: XorInputs, variant: QepVariant, schedule: ScheduleSource },
}

impl ProtocolSetup {
    /// The correct output for both parties.
    pub fn value(&self) -> u8 {
        match self {
            ProtocolSetup::Qmp { inputs } => inputs.value(),
            ProtocolSetup::Qrmp { i, j, .. } => super::eval_greater_than(*i, *j),
            ProtocolSetup::Qep { inputs, .. } => inputs.value(),
        }
    }

    pub fn is_rational(&self) -> bool {
        !matches!(self, ProtocolSetup::Qmp { .. })
    }
}

/// Result of one reconstruction phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub outcome: WorldOutcome,
    pub transcript: Transcript,
    /// First round in which a party did something other than an honest send.
    pub first_deviation: Option<(Party, u32)>,
    /// Who reported a forgery, and in which round.
    pub report: Option<(Party, u32)>,
}

/// An [`Execution`] together with the dealer's hidden parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub execution: Execution,
    pub schedule: Option<RoundSchedule>,
    pub m: u32,
}

impl TrialResult {
    pub fn outcome(&self) -> WorldOutcome {
        self.execution.outcome
    }
}

#[derive(Debug, Clone, Copy)]
enum Rules {
    Qmp { reveal: [u32; 2] },
    Qrmp { r: u32 },
    Qep { r: u32, variant: QepVariant, x: u8, y: u8 },
}

enum Reading {
    Value(u8),
    Null,
    Forgery,
}

struct Engine<'a, T: Real> {
    heap: &'a mut QuantumHeap<T>,
    lists: [&'a ShareList; 2],
    armed: &'a [ArmedStrategy; 2],
    rules: Rules,
    own_input: [OwnInput; 2],
    m: u32,
    state: [Option<u8>; 2],
    transcript: Transcript,
    own_events: [Vec<Event>; 2],
    first_deviation: Option<(Party, u32)>,
    party_rng: &'a mut ChaCha8Rng,
}

fn sub_round_of(party: Party) -> u8 {
    match party {
        Party::P2 => 1,
        Party::P1 => 2,
    }
}

fn check_lists(lists: [&ShareList; 2], m: u32) -> Result<(), ProtocolError> {
    for (list, party) in lists.into_iter().zip(Party::BOTH) {
        if list.rounds.len() != m as usize || list.party != party {
            return Err(ProtocolError::MalformedShareList { party, found: list.rounds.len(), expected: m as usize });
        }
    }
    Ok(())
}

fn check_single_corruption(armed: &[ArmedStrategy; 2]) -> Result<(), ProtocolError> {
    if !armed[0].is_honest() && !armed[1].is_honest() {
        return Err(ProtocolError::TwoCorruptedParties);
    }
    Ok(())
}

impl<'a, T: Real> Engine<'a, T> {
    fn record(&mut self, round: u32, sub_round: u8, actor: Party, action: EventAction) {
        let e = Event { round, sub_round, actor, action };
        self.transcript.events.push(e);
        self.own_events[actor.index()].push(e);
    }

    fn decide(&self, party: Party, round: u32) -> Action {
        let revelation_round = match self.rules {
            Rules::Qmp { reveal } => Some(reveal[party.index()]),
            _ => None,
        };
        let view = PartyView {
            party,
            own_input: self.own_input[party.index()],
            m: self.m,
            round,
            revelation_round,
            events: &self.own_events[party.index()],
        };
        decide_action(&self.armed[party.index()], &view)
    }

    /// Sent-slot qubit of `party` for round `l`.
    fn sent_slot(&self, party: Party, l: u32) -> QubitHandle {
        let pair = self.lists[party.index()].round(l);
        match party {
            Party::P1 => pair.second,
            Party::P2 => pair.first,
        }
    }

    fn send(&mut self, party: Party, l: u32, action: Action) -> Result<QubitHandle, ProtocolError> {
        let sub = sub_round_of(party);
        if action != Action::SendHonest && self.first_deviation.is_none() {
            self.first_deviation = Some((party, l));
        }
        let (qubit, event) = match action {
            Action::SendForged(spec) => {
                let slot = if party == Party::P1 { Slot::Second } else { Slot::First };
                let h = self.heap.alloc_pure(spec.cast(), QubitMeta::new(party.owner(), l, slot))?;
                (h, EventAction::SentForged)
            }
            Action::SendSwapped { from_round } if (1..=self.m).contains(&from_round) => {
                (self.sent_slot(party, from_round), EventAction::SentSwapped)
            }
            _ => (self.sent_slot(party, l), EventAction::Sent),
        };
        self.record(l, sub, party, event);
        Ok(qubit)
    }

    fn interpret(&self, party: Party, l: u32, label: BellLabel) -> Reading {
        match self.rules {
            Rules::Qmp { reveal } => {
                if l == reveal[party.index()] {
                    label.bit().map_or(Reading::Forgery, Reading::Value)
                } else if label == BellLabel::G2 {
                    Reading::Null
                } else {
                    Reading::Forgery
                }
            }
            Rules::Qrmp { .. } => match label {
                BellLabel::G3 => Reading::Forgery,
                BellLabel::G2 => Reading::Null,
                other => Reading::Value(other.bit().expect("G0 or G1")),
            },
            Rules::Qep { .. } => label.bit().map_or(Reading::Forgery, Reading::Value),
        }
    }

    /// Applies a measurement result; returns `true` if the party reported forgery.
    fn absorb(&mut self, party: Party, l: u32, label: BellLabel) -> bool {
        let sub = 3 - sub_round_of(party);
        self.record(l, sub, party, EventAction::Measured(label));
        match self.interpret(party, l, label) {
            Reading::Forgery => {
                self.record(l, sub, party, EventAction::ReportedForgery);
                true
            }
            Reading::Null => {
                self.record(l, sub, party, EventAction::ConcludedNull);
                false
            }
            Reading::Value(v) => {
                let slot = &mut self.state[party.index()];
                match self.rules {
                    Rules::Qrmp { .. } => {
                        slot.get_or_insert(v);
                    }
                    _ => *slot = Some(v),
                }
                let v = slot.expect("just set");
                self.record(l, sub, party, EventAction::ConcludedValue(v));
                false
            }
        }
    }

    fn held(&self, party: Party) -> PartyOutcome {
        self.state[party.index()].map_or(PartyOutcome::Null, PartyOutcome::Value)
    }

    fn abort_outcome(&mut self, aborter: Party, l: u32) -> WorldOutcome {
        let honest = aborter.other();
        let mut out = WorldOutcome::new(PartyOutcome::Null, PartyOutcome::Null);
        out.set(aborter, self.held(aborter));
        let honest_out = match self.rules {
            Rules::Qmp { .. } => {
                let default = if honest == Party::P1 { 1 } else { 0 };
                PartyOutcome::Value(self.state[honest.index()].unwrap_or(default))
            }
            Rules::Qrmp { .. } => self.held(honest),
            Rules::Qep { r, variant, x, y } => {
                if l <= r && variant == QepVariant::Qep2 && aborter == Party::P1 {
                    PartyOutcome::Value(1)
                } else if let Some(v) = self.state[honest.index()] {
                    PartyOutcome::Value(v)
                } else {
                    let v = match honest {
                        Party::P1 => eval_embedded_xor(x, random_y(self.party_rng)),
                        Party::P2 => eval_embedded_xor(random_x(self.party_rng), y),
                    };
                    PartyOutcome::Value(v)
                }
            }
        };
        out.set(honest, honest_out);
        out
    }

    fn finish(&mut self, outcome: WorldOutcome, round: u32, report: Option<(Party, u32)>) -> Execution {
        for party in Party::BOTH {
            let action = match outcome.get(party) {
                PartyOutcome::Value(v) => EventAction::ConcludedValue(v),
                PartyOutcome::ForgeryReported => continue,
                _ => EventAction::ConcludedNull,
            };
            self.record(round, FINAL_SUB_ROUND, party, action);
        }
        Execution {
            outcome,
            transcript: std::mem::take(&mut self.transcript),
            first_deviation: self.first_deviation,
            report,
        }
    }

    fn forgery(&mut self, reporter: Party, l: u32) -> Execution {
        let mut out = WorldOutcome::new(PartyOutcome::Null, PartyOutcome::Null);
        out.set(reporter, PartyOutcome::ForgeryReported);
        self.finish(out, l, Some((reporter, l)))
    }

    fn abort(&mut self, aborter: Party, l: u32) -> Execution {
        self.record(l, sub_round_of(aborter), aborter, EventAction::Aborted);
        if let Rules::Qrmp { r } | Rules::Qep { r, variant: QepVariant::Qep2, .. } = self.rules {
            self.record(l, sub_round_of(aborter), aborter, EventAction::RevelationDisclosed(l == r));
        }
        let out = self.abort_outcome(aborter, l);
        self.finish(out, l, None)
    }

    fn run(mut self) -> Result<Execution, ProtocolError> {
        for l in 1..=self.m {
            let act1 = self.decide(Party::P1, l);
            let act2 = self.decide(Party::P2, l);

            if act2 == Action::Abort {
                self.first_deviation.get_or_insert((Party::P2, l));
                return Ok(self.abort(Party::P2, l));
            }
            let q = self.send(Party::P2, l, act2)?;
            let own = self.lists[0].round(l).first;
            let label = self.heap.measure_bell(own, q)?;
            if self.absorb(Party::P1, l, label) {
                return Ok(self.forgery(Party::P1, l));
            }

            if act1 == Action::Abort {
                self.first_deviation.get_or_insert((Party::P1, l));
                return Ok(self.abort(Party::P1, l));
            }
            let q = self.send(Party::P1, l, act1)?;
            let own = self.lists[1].round(l).second;
            let label = self.heap.measure_bell(q, own)?;
            if self.absorb(Party::P2, l, label) {
                return Ok(self.forgery(Party::P2, l));
            }
        }
        let out = WorldOutcome::new(self.held(Party::P1), self.held(Party::P2));
        let m = self.m;
        Ok(self.finish(out, m, None))
    }
}

#[allow(clippy::too_many_arguments)]
fn execute<T: Real>(
    heap: &mut QuantumHeap<T>,
    lists: [&ShareList; 2],
    armed: &[ArmedStrategy; 2],
    rules: Rules,
    own_input: [OwnInput; 2],
    m: u32,
    party_rng: &mut ChaCha8Rng,
) -> Result<Execution, ProtocolError> {
    check_single_corruption(armed)?;
    check_lists(lists, m)?;
    Engine {
        heap,
        lists,
        armed,
        rules,
        own_input,
        m,
        state: [None; 2],
        transcript: Transcript { events: Vec::with_capacity(8 * m as usize) },
        own_events: [Vec::new(), Vec::new()],
        first_deviation: None,
        party_rng,
    }
    .run()
}

/// Reconstruction phase of the millionaires' protocol.
pub fn run_qmp_fair<T: Real>(
    heap: &mut QuantumHeap<T>,
    lists: (&ShareList, &ShareList),
    armed: &[ArmedStrategy; 2],
    inputs: &MillionaireInputs,
) -> Result<Execution, ProtocolError> {
    inputs.validate()?;
    let own = [OwnInput::Millionaire { secret: inputs.i }, OwnInput::Millionaire { secret: inputs.j }];
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let rules = Rules::Qmp { reveal: [inputs.i, inputs.j] };
    execute(heap, [lists.0, lists.1], armed, rules, own, inputs.m, &mut unused)
}

/// Reconstruction phase of the rational millionaires' protocol.
pub fn run_qrmp_fair<T: Real>(
    heap: &mut QuantumHeap<T>,
    lists: (&ShareList, &ShareList),
    armed: &[ArmedStrategy; 2],
    i: u32,
    j: u32,
    schedule: &RoundSchedule,
) -> Result<Execution, ProtocolError> {
    schedule.validate()?;
    let own = [OwnInput::Millionaire { secret: i }, OwnInput::Millionaire { secret: j }];
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    execute(heap, [lists.0, lists.1], armed, Rules::Qrmp { r: schedule.r }, own, schedule.m, &mut unused)
}

/// Reconstruction phase of the embedded-XOR protocol or its rational variant.
/// `party_rng` supplies the fresh sample an honest party falls back on when
/// the opponent aborts before any value was exchanged.
#[allow(clippy::too_many_arguments)]
pub fn run_qep_fair<T: Real>(
    heap: &mut QuantumHeap<T>,
    lists: (&ShareList, &ShareList),
    armed: &[ArmedStrategy; 2],
    inputs: &XorInputs,
    schedule: &RoundSchedule,
    variant: QepVariant,
    party_rng: &mut ChaCha8Rng,
) -> Result<Execution, ProtocolError> {
    inputs.validate()?;
    schedule.validate()?;
    let own = [OwnInput::XorP1 { x: inputs.x }, OwnInput::XorP2 { y: inputs.y }];
    let rules = Rules::Qep { r: schedule.r, variant, x: inputs.x, y: inputs.y };
    execute(heap, [lists.0, lists.1], armed, rules, own, schedule.m, party_rng)
}

/// Dealer plus reconstruction for one seeded trial.
pub fn run_trial<T: Real>(
    setup: &ProtocolSetup,
    strategies: &[AdversaryStrategy; 2],
    seed: u64,
) -> Result<TrialResult, ProtocolError> {
    if !strategies[0].is_honest() && !strategies[1].is_honest() {
        return Err(ProtocolError::TwoCorruptedParties);
    }
    let mut heap = QuantumHeap::<T>::with_rng(stream_rng(seed, streams::HEAP));
    let mut dealer_rng = stream_rng(seed, streams::DEALER);
    let mut strategy_rng = stream_rng(seed, streams::STRATEGY);
    let mut party_rng = stream_rng(seed, streams::PARTY);

    let (execution, schedule, m) = match setup {
        ProtocolSetup::Qmp { inputs } => {
            let (p1, p2) = qshare_gen(inputs, &mut heap)?;
            let armed = strategies.map(|s| arm(&s, inputs.m, &mut strategy_rng));
            (run_qmp_fair(&mut heap, (&p1, &p2), &armed, inputs)?, None, inputs.m)
        }
        ProtocolSetup::Qrmp { i, j, schedule } => {
            let schedule = schedule.resolve(&mut dealer_rng)?;
            let (p1, p2) = qrshare_gen(*i, *j, &schedule, &mut heap)?;
            let armed = strategies.map(|s| arm(&s, schedule.m, &mut strategy_rng));
            (run_qrmp_fair(&mut heap, (&p1, &p2), &armed, *i, *j, &schedule)?, Some(schedule), schedule.m)
        }
        ProtocolSetup::Qep { inputs, variant, schedule } => {
            let schedule = schedule.resolve(&mut dealer_rng)?;
            let (p1, p2, _) = qeshare_gen(inputs, &schedule, &mut heap, &mut dealer_rng)?;
            let armed = strategies.map(|s| arm(&s, schedule.m, &mut strategy_rng));
            let exec = run_qep_fair(&mut heap, (&p1, &p2), &armed, inputs, &schedule, *variant, &mut party_rng)?;
            (exec, Some(schedule), schedule.m)
        }
    };
    Ok(TrialResult { execution, schedule, m })
}
