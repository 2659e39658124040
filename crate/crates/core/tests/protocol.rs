use proptest::prelude::*;
use qfair::adversary::{AdversaryStrategy, ArmedStrategy, ForgeSpec, RoundChoice};
use qfair::protocol::*;
use qfair::quantum::{PureQubitSpec, QuantumHeap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const H: AdversaryStrategy = AdversaryStrategy::Honest;

fn abort(l: u32) -> AdversaryStrategy {
    AdversaryStrategy::AbortAt { round: RoundChoice::Fixed(l) }
}

fn qmp(i: u32, j: u32, m: u32) -> ProtocolSetup {
    ProtocolSetup::Qmp { inputs: MillionaireInputs::new(i, j, m).unwrap() }
}

fn fixed(r: u32, d: u32) -> ScheduleSource {
    ScheduleSource::Fixed(RoundSchedule::new(r, d, 0.5).unwrap())
}

fn qrmp(i: u32, j: u32, r: u32, d: u32) -> ProtocolSetup {
    ProtocolSetup::Qrmp { i, j, schedule: fixed(r, d) }
}

fn qep(x: u8, y: u8, r: u32, d: u32, variant: QepVariant) -> ProtocolSetup {
    ProtocolSetup::Qep { inputs: XorInputs::new(x, y).unwrap(), variant, schedule: fixed(r, d) }
}

fn run(setup: ProtocolSetup, s: [AdversaryStrategy; 2], seed: u64) -> TrialResult {
    run_trial::<f64>(&setup, &s, seed).unwrap()
}

use PartyOutcome::{Null, Value};

#[test]
fn qmp_honest_reveals_at_own_rounds() {
    let t = run(qmp(2, 3, 4), [H, H], 1);
    assert_eq!(t.outcome(), WorldOutcome::values(0, 0));
    let tr = &t.execution.transcript;
    assert_eq!(tr.first_value_round(Party::P1), Some(2));
    assert_eq!(tr.first_value_round(Party::P2), Some(3));
    assert!(tr.is_ordered());
}

#[test]
fn qmp_abort_rules() {
    let t = run(qmp(2, 3, 4), [abort(1), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Null, Value(0)));

    let t = run(qmp(1, 2, 4), [H, abort(1)], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Value(1), Null));

    // P1 aborts after its own revelation but before P2's: P2 takes its default.
    let t = run(qmp(2, 4, 4), [abort(3), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Value(0), Value(0)));

    // P2 already holds its value when P1 aborts.
    let t = run(qmp(4, 2, 4), [abort(3), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Null, Value(1)));
}

#[test]
fn qmp_equal_secrets_reveal_together() {
    for m in 1..=4 {
        for k in 1..=m {
            let t = run(qmp(k, k, m), [H, H], 3);
            assert_eq!(t.outcome(), WorldOutcome::values(0, 0));
            assert_eq!(t.execution.transcript.first_value_round(Party::P1), Some(k));
            assert_eq!(t.execution.transcript.first_value_round(Party::P2), Some(k));
        }
    }
}

#[test]
fn qrmp_honest_and_aborts() {
    let t = run(qrmp(3, 1, 2, 2), [H, H], 1);
    assert_eq!(t.outcome(), WorldOutcome::values(1, 1));
    assert_eq!(t.execution.transcript.first_value_round(Party::P1), Some(2));
    assert_eq!(t.execution.transcript.first_value_round(Party::P2), Some(2));

    let t = run(qrmp(3, 1, 3, 1), [abort(1), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Null, Null));

    let t = run(qrmp(3, 1, 3, 1), [abort(3), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Value(1), Null));

    let t = run(qrmp(3, 1, 3, 2), [abort(4), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::values(1, 1));

    let t = run(qrmp(3, 1, 3, 1), [H, abort(3)], 1);
    assert_eq!(t.outcome(), WorldOutcome::new(Null, Null));
}

#[test]
fn qrmp_abort_disclosure_follows_declaration() {
    let t = run(qrmp(1, 2, 2, 1), [abort(2), H], 1);
    let events = &t.execution.transcript.events;
    let k = events.iter().position(|e| e.action == EventAction::Aborted).unwrap();
    assert_eq!(events[k + 1].action, EventAction::RevelationDisclosed(true));
    assert_eq!(events[k + 1].actor, Party::P1);
}

#[test]
fn qep_honest_and_aborts() {
    let t = run(qep(2, 1, 2, 1, QepVariant::Qep), [H, H], 1);
    assert_eq!(t.outcome(), WorldOutcome::values(1, 1));

    // P1 aborts at r: it holds f, P2 keeps its round r-1 value.
    for seed in 0..40 {
        let setup = qep(1, 1, 3, 1, QepVariant::Qep);
        let t = run(setup, [abort(3), H], seed);
        let last_b = t
            .execution
            .transcript
            .events_of(Party::P2)
            .filter(|e| e.round == 2 && e.sub_round == 2)
            .find_map(|e| match e.action {
                EventAction::ConcludedValue(v) => Some(v),
                _ => None,
            })
            .unwrap();
        assert_eq!(t.outcome(), WorldOutcome::new(Value(0), Value(last_b)));
    }

    let t = run(qep(3, 1, 4, 1, QepVariant::Qep2), [abort(2), H], 1);
    assert_eq!(t.outcome(), WorldOutcome::values(1, 1));
}

#[test]
fn forgery_report_is_terminal() {
    let forge = AdversaryStrategy::ForgeArbitraryQubit {
        round: RoundChoice::Fixed(1),
        spec: ForgeSpec::Fixed(PureQubitSpec::real(1.0, 0.0)),
    };
    let mut reported = 0;
    for seed in 0..200 {
        let t = run(qmp(2, 3, 4), [forge, H], seed);
        if let Some((who, l)) = t.execution.report {
            reported += 1;
            assert_eq!((who, l), (Party::P2, 1));
            assert_eq!(t.outcome(), WorldOutcome::new(Null, PartyOutcome::ForgeryReported));
            assert_eq!(t.execution.transcript.events.last().unwrap().round, 1);
        }
        assert_eq!(t.execution.first_deviation, Some((Party::P1, 1)));
    }
    assert!((120..180).contains(&reported), "{reported}");
}

#[test]
fn two_corrupted_parties_rejected() {
    let err = run_trial::<f64>(&qmp(1, 1, 2), &[abort(1), abort(2)], 0).unwrap_err();
    assert_eq!(err, ProtocolError::TwoCorruptedParties);
}

#[test]
fn malformed_lists_rejected() {
    let mut heap = QuantumHeap::<f64>::new(0);
    let inputs = MillionaireInputs::new(1, 1, 3).unwrap();
    let (p1, mut p2) = qshare_gen(&inputs, &mut heap).unwrap();
    p2.rounds.pop();
    let armed = [ArmedStrategy::honest(); 2];
    let err = run_qmp_fair(&mut heap, (&p1, &p2), &armed, &inputs).unwrap_err();
    assert!(matches!(err, ProtocolError::MalformedShareList { party: Party::P2, .. }));
}

#[test]
fn honest_runs_consume_every_share() {
    let mut heap = QuantumHeap::<f64>::new(0);
    let inputs = MillionaireInputs::new(3, 2, 5).unwrap();
    let (p1, p2) = qshare_gen(&inputs, &mut heap).unwrap();
    assert_eq!(heap.live_handle_count(), 20);
    let armed = [ArmedStrategy::honest(); 2];
    run_qmp_fair(&mut heap, (&p1, &p2), &armed, &inputs).unwrap();
    assert_eq!(heap.live_handle_count(), 0);
    heap.validate().unwrap();
}

#[test]
fn swapped_off_round_qubit_is_uniform() {
    let mut heap = QuantumHeap::<f64>::new(0);
    let schedule = RoundSchedule::new(3, 2, 0.5).unwrap();
    let (p1, p2) = qrshare_gen(1, 2, &schedule, &mut heap).unwrap();
    let probs = heap.exact_bell_probabilities(p1.round(4).second, p2.round(1).second).unwrap();
    assert!(probs.iter().all(|p| (p - 0.25).abs() < 1e-12), "{probs:?}");

    // The same vector arises from a forged qubit at that position.
    let phi = heap
        .alloc_pure(PureQubitSpec::real(0.6, 0.8), p1.round(1).second.meta)
        .unwrap();
    let forged = heap.exact_bell_probabilities(phi, p2.round(1).second).unwrap();
    for k in 0..4 {
        assert!((forged[k] - probs[k]).abs() < 1e-12);
    }
}

#[test]
fn swap_statistics_match_forgery_off_round() {
    let swap = AdversaryStrategy::SwapShares { round: RoundChoice::Fixed(1) };
    let n = 4000;
    let mut swap_hits = 0;
    for seed in 0..n {
        // Round 1 and its partner are off-rounds for P2 (j = 5).
        let t = run(qmp(5, 5, 5), [swap, H], seed);
        if t.execution.report == Some((Party::P2, 1)) {
            swap_hits += 1;
        }
    }
    let p = swap_hits as f64 / n as f64;
    assert!((p - 0.75).abs() < 0.03, "{p}");
}

#[test]
fn trials_are_reproducible() {
    let s = AdversaryStrategy::ForgeArbitraryQubit { round: RoundChoice::UniformRandom, spec: ForgeSpec::HaarRandom };
    let setup = ProtocolSetup::Qrmp { i: 2, j: 1, schedule: ScheduleSource::Sampled { gamma: 0.3 } };
    for seed in 0..20 {
        let a = run(setup, [s, H], seed);
        let b = run(setup, [s, H], seed);
        assert_eq!(a, b);
    }
}

#[test]
fn single_precision_engine() {
    let t = run_trial::<f32>(&qmp(3, 2, 4), &[H, H], 9).unwrap();
    assert_eq!(t.outcome(), WorldOutcome::values(1, 1));
}

#[test]
fn fresh_sample_when_nothing_was_seen() {
    // P2 aborts in round 1: P1 falls back on f(x, ŷ).
    let mut ones = 0;
    let n = 3000;
    for seed in 0..n {
        let t = run(qep(1, 1, 2, 1, QepVariant::Qep), [H, abort(1)], seed);
        assert_eq!(t.outcome().p2, Null);
        ones += usize::from(t.outcome().p1 == Value(1));
    }
    let p = ones as f64 / n as f64;
    assert!((p - 0.5).abs() < 0.04, "{p}");
}

#[test]
fn direct_entry_points_agree_with_trial_runner() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inputs = XorInputs::new(2, 2).unwrap();
    let schedule = RoundSchedule::new(2, 3, 0.4).unwrap();
    let mut heap = QuantumHeap::<f64>::new(1);
    let (p1, p2, values) = qeshare_gen(&inputs, &schedule, &mut heap, &mut rng).unwrap();
    let armed = [ArmedStrategy::honest(); 2];
    let exec = run_qep_fair(&mut heap, (&p1, &p2), &armed, &inputs, &schedule, QepVariant::Qep, &mut rng).unwrap();
    assert_eq!(exec.outcome, WorldOutcome::values(0, 0));
    let seen: Vec<u8> = exec
        .transcript
        .events_of(Party::P1)
        .filter(|e| e.sub_round == 1)
        .filter_map(|e| match e.action {
            EventAction::ConcludedValue(v) => Some(v),
            _ => None,
        })
        .collect();
    assert_eq!(seen, values.a);
}

fn all_setups() -> Vec<ProtocolSetup> {
    let mut v = Vec::new();
    for m in 1..=4 {
        for i in 1..=m {
            for j in 1..=m {
                v.push(qmp(i, j, m));
            }
        }
    }
    for (i, j) in [(1, 1), (1, 3), (3, 1)] {
        v.push(ProtocolSetup::Qrmp { i, j, schedule: ScheduleSource::Sampled { gamma: 0.3 } });
    }
    for inputs in XorInputs::all() {
        for variant in [QepVariant::Qep, QepVariant::Qep2] {
            v.push(ProtocolSetup::Qep { inputs, variant, schedule: ScheduleSource::Sampled { gamma: 0.3 } });
        }
    }
    v
}

#[test]
fn honest_completeness_and_silence() {
    for setup in all_setups() {
        for seed in 0..20 {
            let t = run(setup, [H, H], seed);
            let f = setup.value();
            assert_eq!(t.outcome(), WorldOutcome::values(f, f), "{setup:?}");
            let tr = &t.execution.transcript;
            assert!(tr.is_ordered());
            assert!(t.execution.report.is_none());
            match setup {
                ProtocolSetup::Qmp { inputs } => {
                    assert_eq!(tr.first_value_round(Party::P1), Some(inputs.i));
                    assert_eq!(tr.first_value_round(Party::P2), Some(inputs.j));
                }
                ProtocolSetup::Qrmp { .. } => {
                    let r = t.schedule.unwrap().r;
                    assert_eq!(tr.first_value_round(Party::P1), Some(r));
                    assert_eq!(tr.first_value_round(Party::P2), Some(r));
                }
                ProtocolSetup::Qep { .. } => {
                    let r = t.schedule.unwrap().r;
                    for e in tr.events.iter().filter(|e| e.round >= r && e.sub_round < FINAL_SUB_ROUND) {
                        if let EventAction::ConcludedValue(v) = e.action {
                            assert_eq!(v, f);
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qep2_differs_only_after_early_p1_abort(
        x in 1u8..=3, y in 1u8..=2, r in 1u32..5, d in 1u32..4, l in 1u32..9, seed in any::<u64>()
    ) {
        let a = run(qep(x, y, r, d, QepVariant::Qep), [abort(l), H], seed);
        let b = run(qep(x, y, r, d, QepVariant::Qep2), [abort(l), H], seed);
        prop_assert_eq!(a.outcome().p1, b.outcome().p1);
        if l <= r {
            prop_assert_eq!(b.outcome().p2, Value(1));
        } else {
            prop_assert_eq!(a.outcome().p2, b.outcome().p2);
        }
        // P2-side aborts are unaffected by the variant.
        let a = run(qep(x, y, r, d, QepVariant::Qep), [H, abort(l)], seed);
        let b = run(qep(x, y, r, d, QepVariant::Qep2), [H, abort(l)], seed);
        prop_assert_eq!(a.outcome(), b.outcome());
    }

    #[test]
    fn transcripts_stay_ordered_under_deviation(
        kind in 0usize..4, l in 1u32..6, attacker in 0usize..2, seed in any::<u64>(), gamma in 0.1f64..0.9
    ) {
        let s = match kind {
            0 => abort(l),
            1 => AdversaryStrategy::SwapShares { round: RoundChoice::Fixed(l) },
            2 => AdversaryStrategy::ForgeArbitraryQubit { round: RoundChoice::Fixed(l), spec: ForgeSpec::HaarRandom },
            _ => AdversaryStrategy::AbortAtRevelation,
        };
        let mut strategies = [H, H];
        strategies[attacker] = s;
        for setup in [
            qmp(2, 4, 5),
            ProtocolSetup::Qrmp { i: 2, j: 1, schedule: ScheduleSource::Sampled { gamma } },
            ProtocolSetup::Qep { inputs: XorInputs::new(2, 1).unwrap(), variant: QepVariant::Qep, schedule: ScheduleSource::Sampled { gamma } },
        ] {
            let t = run(setup, strategies, seed);
            prop_assert!(t.execution.transcript.is_ordered());
            prop_assert!(t.outcome().p1 != PartyOutcome::NotYetDecided);
            prop_assert!(t.outcome().p2 != PartyOutcome::NotYetDecided);
        }
    }
}
