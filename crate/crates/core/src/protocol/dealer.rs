use rand::Rng;

use super::{
    eval_embedded_xor, random_x, random_y, MillionaireInputs, Party, ProtocolError, RoundSchedule,
    ShareList, SharePair, XorInputs,
};
use crate::quantum::{BellLabel, QubitMeta, QuantumHeap, Slot};
use crate::scalar::Real;

/// Builds both share lists from per-round labels for the first and second slots.
fn deal<T: Real>(
    heap: &mut QuantumHeap<T>,
    labels: impl Iterator<Item = (BellLabel, BellLabel)>,
) -> (ShareList, ShareList) {
    let m = labels.size_hint().0;
    heap.reserve_pairs(2 * m);
    let mut p1 = ShareList { party: Party::P1, rounds: Vec::with_capacity(m) };
    let mut p2 = ShareList { party: Party::P2, rounds: Vec::with_capacity(m) };
    for (k, (first, second)) in labels.enumerate() {
        let round = k as u32 + 1;
        let meta = |party: Party, slot| QubitMeta::new(party.owner(), round, slot);
        let (a1, b1) = heap.alloc_bell(first, meta(Party::P1, Slot::First), meta(Party::P2, Slot::First));
        let (a2, b2) = heap.alloc_bell(second, meta(Party::P1, Slot::Second), meta(Party::P2, Slot::Second));
        p1.rounds.push(SharePair { first: a1, second: a2 });
        p2.rounds.push(SharePair { first: b1, second: b2 });
    }
    (p1, p2)
}

/// Shares for the millionaires' protocol.
///
/// Round `i` carries `f` in the first slot (read by P1), round `j` carries it
/// in the second slot (read by P2). Every other slot holds `G2`.
pub fn qshare_gen<T: Real>(
    inputs: &MillionaireInputs,
    heap: &mut QuantumHeap<T>,
) -> Result<(ShareList, ShareList), ProtocolError> {
    inputs.validate()?;
    let value = BellLabel::for_bit(inputs.value());
    let labels = (1..=inputs.m).map(|l| {
        let first = if l == inputs.i { value } else { BellLabel::G2 };
        let second = if l == inputs.j { value } else { BellLabel::G2 };
        (first, second)
    });
    Ok(deal(heap, labels))
}

/// Shares for the rational millionaires' protocol: `f` in both slots of round
/// `r`, `G2` elsewhere.
pub fn qrshare_gen<T: Real>(
    i: u32,
    j: u32,
    schedule: &RoundSchedule,
    heap: &mut QuantumHeap<T>,
) -> Result<(ShareList, ShareList), ProtocolError> {
    schedule.validate()?;
    if i == 0 || j == 0 {
        return Err(ProtocolError::InvalidMillionaireInputs { i, j, m: schedule.m });
    }
    let value = BellLabel::for_bit(super::eval_greater_than(i, j));
    let labels = (1..=schedule.m).map(|l| {
        if l == schedule.r {
            (value, value)
        } else {
            (BellLabel::G2, BellLabel::G2)
        }
    });
    Ok(deal(heap, labels))
}

/// The bits the dealer encoded for each round of the embedded-XOR protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorRoundValues {
    /// P1's per-round values `a_l`.
    pub a: Vec<u8>,
    /// P2's per-round values `b_l`.
    pub b: Vec<u8>,
}

/// Shares for the embedded-XOR protocol.
///
/// Before round `r` the first slot encodes `f(x, ŷ)` and the second `f(x̂, y)`
/// with fresh uniform `ŷ`, `x̂` per round; from `r` on both encode `f(x, y)`.
pub fn qeshare_gen<T: Real, R: Rng + ?Sized>(
    inputs: &XorInputs,
    schedule: &RoundSchedule,
    heap: &mut QuantumHeap<T>,
    rng: &mut R,
) -> Result<(ShareList, ShareList, XorRoundValues), ProtocolError> {
    inputs.validate()?;
    schedule.validate()?;
    let f = inputs.value();
    let mut values = XorRoundValues { a: Vec::new(), b: Vec::new() };
    for l in 1..=schedule.m {
        let (a, b) = if l < schedule.r {
            (eval_embedded_xor(inputs.x, random_y(rng)), eval_embedded_xor(random_x(rng), inputs.y))
        } else {
            (f, f)
        };
        values.a.push(a);
        values.b.push(b);
    }
    let labels = values.a.iter().zip(&values.b).map(|(&a, &b)| (BellLabel::for_bit(a), BellLabel::for_bit(b)));
    let (p1, p2) = deal(heap, labels);
    Ok((p1, p2, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_label(heap: &QuantumHeap<f64>, a: crate::quantum::QubitHandle, b: crate::quantum::QubitHandle) -> BellLabel {
        let p = heap.exact_bell_probabilities(a, b).unwrap();
        let k = (0..4).find(|&k| (p[k] - 1.0).abs() < 1e-12).expect("eigenstate");
        BellLabel::from_index(k).unwrap()
    }

    fn layout(heap: &QuantumHeap<f64>, p1: &ShareList, p2: &ShareList) -> Vec<(BellLabel, BellLabel)> {
        p1.rounds
            .iter()
            .zip(&p2.rounds)
            .map(|(a, b)| (pair_label(heap, a.first, b.first), pair_label(heap, a.second, b.second)))
            .collect()
    }

    #[test]
    fn millionaire_layout() {
        use BellLabel::*;
        let mut heap = QuantumHeap::<f64>::new(0);
        let (p1, p2) = qshare_gen(&MillionaireInputs::new(2, 3, 4).unwrap(), &mut heap).unwrap();
        assert_eq!(layout(&heap, &p1, &p2), vec![(G2, G2), (G0, G2), (G2, G0), (G2, G2)]);

        let (p1, p2) = qshare_gen(&MillionaireInputs::new(1, 1, 2).unwrap(), &mut heap).unwrap();
        assert_eq!(layout(&heap, &p1, &p2), vec![(G0, G0), (G2, G2)]);

        let (p1, p2) = qshare_gen(&MillionaireInputs::new(3, 1, 3).unwrap(), &mut heap).unwrap();
        assert_eq!(layout(&heap, &p1, &p2), vec![(G2, G1), (G2, G2), (G1, G2)]);
        assert_eq!(p1.handles().count(), 6);
        assert_eq!(p2.handles().count(), 6);
    }

    #[test]
    fn millionaire_rejects_bad_inputs() {
        let mut heap = QuantumHeap::<f64>::new(0);
        let bad = MillionaireInputs { i: 5, j: 1, m: 3 };
        assert!(qshare_gen(&bad, &mut heap).is_err());
    }

    #[test]
    fn rational_millionaire_layout() {
        use BellLabel::*;
        let mut heap = QuantumHeap::<f64>::new(0);
        let schedule = RoundSchedule::new(2, 1, 0.5).unwrap();
        let (p1, p2) = qrshare_gen(3, 1, &schedule, &mut heap).unwrap();
        assert_eq!(layout(&heap, &p1, &p2), vec![(G2, G2), (G1, G1), (G2, G2)]);
    }

    #[test]
    fn handle_metadata() {
        let mut heap = QuantumHeap::<f64>::new(0);
        let (p1, p2) = qshare_gen(&MillionaireInputs::new(1, 2, 3).unwrap(), &mut heap).unwrap();
        for (list, owner) in [(&p1, crate::quantum::Owner::P1), (&p2, crate::quantum::Owner::P2)] {
            for (k, pair) in list.rounds.iter().enumerate() {
                assert_eq!(pair.first.meta, QubitMeta::new(owner, k as u32 + 1, Slot::First));
                assert_eq!(pair.second.meta, QubitMeta::new(owner, k as u32 + 1, Slot::Second));
            }
        }
        let mut ids: Vec<u32> = p1.handles().chain(p2.handles()).map(|h| h.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 12);
    }

    #[test]
    fn xor_layout_matches_values() {
        let mut heap = QuantumHeap::<f64>::new(0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let schedule = RoundSchedule::new(4, 2, 0.5).unwrap();
        let inputs = XorInputs::new(3, 2).unwrap();
        let (p1, p2, values) = qeshare_gen(&inputs, &schedule, &mut heap, &mut rng).unwrap();
        for (l, (first, second)) in layout(&heap, &p1, &p2).into_iter().enumerate() {
            assert_eq!(first.bit(), Some(values.a[l]));
            assert_eq!(second.bit(), Some(values.b[l]));
        }
        assert!(values.a.iter().all(|&a| a == 1));
        assert_eq!(&values.b[3..], &[1, 1, 1]);
    }

    #[test]
    fn xor_padding_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let schedule = RoundSchedule::new(2, 1, 0.5).unwrap();
        let n = 30_000;
        let mut zeros = 0;
        for _ in 0..n {
            let mut heap = QuantumHeap::<f64>::new(0);
            let (_, _, v) = qeshare_gen(&XorInputs::new(1, 1).unwrap(), &schedule, &mut heap, &mut rng).unwrap();
            zeros += usize::from(v.b[0] == 0);
        }
        assert!((zeros as f64 / n as f64 - 1.0 / 3.0).abs() < 0.015);
    }
}
