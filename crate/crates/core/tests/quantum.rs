use num_complex::Complex;
use proptest::prelude::*;
use qfair::quantum::*;

fn meta() -> QubitMeta {
    QubitMeta::new(Owner::Dealer, 1, Slot::First)
}

fn spec(a: f64, b: f64, c: f64, d: f64) -> Option<PureQubitSpec<f64>> {
    let n = (a * a + b * b + c * c + d * d).sqrt();
    (n > 1e-3).then(|| PureQubitSpec::new(Complex::new(a / n, b / n), Complex::new(c / n, d / n)))
}

/// Brute-force probability of label `k` for qubits at positions `pa`, `pb`
/// of a pure `n`-qubit state vector, with the projector written out in full.
fn brute_force(psi: &[Complex<f64>], n: usize, pa: usize, pb: usize, label: BellLabel) -> f64 {
    let g = bell_state_vector::<f64>(label);
    let dim = 1 << n;
    let bit = |x: usize, p: usize| (x >> (n - 1 - p)) & 1;
    let mut total = 0.0;
    // Sum over basis states of the untouched qubits.
    for rest in 0..dim {
        if bit(rest, pa) != 0 || bit(rest, pb) != 0 {
            continue;
        }
        let mut amp = Complex::new(0.0, 0.0);
        for ab in 0..4 {
            let idx = rest | ((ab >> 1) << (n - 1 - pa)) | ((ab & 1) << (n - 1 - pb));
            amp += g[ab].conj() * psi[idx];
        }
        total += amp.norm_sqr();
    }
    total
}

fn kron(a: &[Complex<f64>], b: &[Complex<f64>]) -> Vec<Complex<f64>> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

#[test]
fn two_pair_halves_match_brute_force() {
    let g0 = bell_state_vector::<f64>(BellLabel::G0);
    let psi = kron(&g0, &g0);
    let mut heap = QuantumHeap::<f64>::new(0);
    let (a1, _a2) = heap.alloc_bell(BellLabel::G0, meta(), meta());
    let (b1, _b2) = heap.alloc_bell(BellLabel::G0, meta(), meta());
    let exact = heap.exact_bell_probabilities(a1, b1).unwrap();
    for l in BellLabel::ALL {
        let bf = brute_force(&psi, 4, 0, 2, l);
        assert!((bf - 0.25).abs() < 1e-12);
        assert!((exact[l.index()] - bf).abs() < 1e-12);
    }
}

#[test]
fn swapped_g2_halves_match_brute_force() {
    let g2 = bell_state_vector::<f64>(BellLabel::G2);
    let psi = kron(&g2, &g2);
    let mut heap = QuantumHeap::<f64>::new(0);
    let (_a1, a2) = heap.alloc_bell(BellLabel::G2, meta(), meta());
    let (b1, _b2) = heap.alloc_bell(BellLabel::G2, meta(), meta());
    let exact = heap.exact_bell_probabilities(b1, a2).unwrap();
    for l in BellLabel::ALL {
        assert!((exact[l.index()] - brute_force(&psi, 4, 2, 1, l)).abs() < 1e-12);
    }
}

#[test]
fn bell_marginals_coincide() {
    let mut heap = QuantumHeap::<f64>::new(0);
    let (a, _) = heap.alloc_bell(BellLabel::G0, meta(), meta());
    let (b, _) = heap.alloc_bell(BellLabel::G1, meta(), meta());
    let ra = partial_trace(heap.joint_state(a).unwrap(), &[a]).unwrap();
    let rb = partial_trace(heap.joint_state(b).unwrap(), &[b]).unwrap();
    assert_eq!(ra, rb);
    assert!((ra.get(0, 0).re - 0.5).abs() < 1e-15);
    assert_eq!(partial_trace(heap.joint_state(a).unwrap(), &[]), Err(QuantumError::EmptyKeep));
}

#[test]
fn forged_measurement_frequencies() {
    let n = 100_000;
    let mut counts = [0usize; 4];
    let mut heap = QuantumHeap::<f64>::new(42);
    for _ in 0..n {
        let (_keep, sent) = heap.alloc_bell(BellLabel::G2, meta(), meta());
        let phi = heap.alloc_pure(PureQubitSpec::real(0.6, 0.8), meta()).unwrap();
        counts[heap.measure_bell(phi, sent).unwrap().index()] += 1;
    }
    for c in counts {
        assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn fresh_pairs_measure_deterministically() {
    let mut heap = QuantumHeap::<f64>::new(3);
    for l in BellLabel::ALL {
        for _ in 0..20 {
            let (a, b) = heap.alloc_bell(l, meta(), meta());
            assert_eq!(heap.measure_bell(a, b).unwrap(), l);
        }
    }
}

proptest! {
    #[test]
    fn forgery_is_uniform_for_any_amplitudes(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
        label in 0usize..4, phi_left in any::<bool>()
    ) {
        let Some(s) = spec(a, b, c, d) else { return Ok(()) };
        let mut heap = QuantumHeap::<f64>::new(0);
        let (_kept, half) = heap.alloc_bell(BellLabel::from_index(label).unwrap(), meta(), meta());
        let phi = heap.alloc_pure(s, meta()).unwrap();
        let probs = if phi_left {
            heap.exact_bell_probabilities(phi, half).unwrap()
        } else {
            heap.exact_bell_probabilities(half, phi).unwrap()
        };
        for p in probs {
            prop_assert!((p - 0.25).abs() < 1e-10, "{:?}", probs);
        }
    }

    #[test]
    fn heap_stays_valid_through_measurements(seed in any::<u64>(), ops in prop::collection::vec((0usize..4, 0usize..4, 0usize..3), 1..12)) {
        let mut heap = QuantumHeap::<f64>::new(seed);
        let mut live: Vec<QubitHandle> = Vec::new();
        for (label, pick, kind) in ops {
            let (a, b) = heap.alloc_bell(BellLabel::from_index(label).unwrap(), meta(), meta());
            live.push(a);
            live.push(b);
            if kind == 0 && live.len() >= 2 {
                let x = live.remove(pick % live.len());
                let y = live.remove(pick % live.len());
                let before = heap.exact_bell_probabilities(x, y).unwrap();
                let sum: f64 = before.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10);
                for p in before {
                    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
                }
                heap.measure_bell(x, y).unwrap();
                prop_assert!(!heap.is_live(x) && !heap.is_live(y));
            } else if kind == 1 {
                let x = live.remove(pick % live.len());
                heap.discard(x).unwrap();
            }
            heap.validate().unwrap();
            for state in heap.joint_states() {
                prop_assert!(state.handles.len() <= MAX_JOINT_QUBITS);
                prop_assert!((state.rho.trace().re - 1.0).abs() < 1e-10);
                prop_assert!(state.rho.max_hermitian_defect() < 1e-12);
                prop_assert!(state.rho.min_eigenvalue() > -1e-10);
            }
        }
    }
}
