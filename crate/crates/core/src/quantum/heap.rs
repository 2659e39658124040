//! Registry of joint quantum states addressed by qubit handles.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bell::{bell_state_vector, BellLabel};
use super::density::DensityMatrix;
use super::QuantumError;
use crate::scalar::Real;

/// Largest number of qubits any joint state may span.
pub const MAX_JOINT_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Owner {
    P1,
    P2,
    Dealer,
}

/// Which of a round's two marked qubits a handle is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitMeta {
    pub owner: Owner,
    pub round: u32,
    pub slot: Slot,
}

impl QubitMeta {
    pub fn new(owner: Owner, round: u32, slot: Slot) -> Self {
        Self { owner, round, slot }
    }
}

/// Reference to one live (or consumed) qubit of a heap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitHandle {
    pub id: u32,
    pub meta: QubitMeta,
}

/// A single-qubit pure state `α|0⟩ + β|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubitSpec<T> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

impl<T: Real> PureQubitSpec<T> {
    pub fn new(alpha: Complex<T>, beta: Complex<T>) -> Self {
        Self { alpha, beta }
    }

    pub fn real(alpha: T, beta: T) -> Self {
        Self::new(Complex::new(alpha, T::zero()), Complex::new(beta, T::zero()))
    }

    pub fn norm_sqr(&self) -> T {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::hermitian_tol()
    }

    pub fn cast<U: Real>(&self) -> PureQubitSpec<U> {
        let c = |z: Complex<T>| {
            Complex::new(
                U::from_f64(z.re.to_f64().unwrap()).unwrap(),
                U::from_f64(z.im.to_f64().unwrap()).unwrap(),
            )
        };
        PureQubitSpec { alpha: c(self.alpha), beta: c(self.beta) }
    }
}

/// A node of the heap: one joint state over an ordered list of handles.
#[derive(Debug, Clone)]
pub struct JointState<T> {
    pub handles: Vec<u32>,
    pub rho: DensityMatrix<T>,
}

impl<T: Real> JointState<T> {
    fn position(&self, id: u32) -> Option<usize> {
        self.handles.iter().position(|&h| h == id)
    }
}

/// Reduced density matrix of `state` on the handles in `keep`, in that order.
pub fn partial_trace<T: Real>(
    state: &JointState<T>,
    keep: &[QubitHandle],
) -> Result<DensityMatrix<T>, QuantumError> {
    if keep.is_empty() {
        return Err(QuantumError::EmptyKeep);
    }
    let mut positions = Vec::with_capacity(keep.len());
    for h in keep {
        let p = state.position(h.id).ok_or(QuantumError::NotInState(h.id))?;
        if positions.contains(&p) {
            return Err(QuantumError::SameHandle(h.id));
        }
        positions.push(p);
    }
    Ok(state.rho.partial_trace(&positions))
}

#[derive(Debug, Clone, Copy)]
struct HandleSlot {
    meta: QubitMeta,
    /// Node index while live; `None` once measured or discarded.
    node: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct QuantumHeap<T> {
    handles: Vec<HandleSlot>,
    nodes: Vec<Option<JointState<T>>>,
    free_nodes: Vec<usize>,
    rng: ChaCha8Rng,
}

impl<T: Real> QuantumHeap<T> {
    pub fn new(seed: u64) -> Self {
        Self::with_rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(rng: ChaCha8Rng) -> Self {
        Self { handles: Vec::new(), nodes: Vec::new(), free_nodes: Vec::new(), rng }
    }

    /// Reserves room for `pairs` more Bell pairs.
    pub fn reserve_pairs(&mut self, pairs: usize) {
        self.handles.reserve(2 * pairs);
        self.nodes.reserve(pairs);
        self.free_nodes.reserve(pairs);
    }

    fn insert_node(&mut self, state: JointState<T>) -> usize {
        if let Some(i) = self.free_nodes.pop() {
            self.nodes[i] = Some(state);
            i
        } else {
            self.nodes.push(Some(state));
            self.nodes.len() - 1
        }
    }

    fn remove_node(&mut self, index: usize) -> JointState<T> {
        self.free_nodes.push(index);
        self.nodes[index].take().expect("live node")
    }

    fn new_handle(&mut self, meta: QubitMeta, node: usize) -> QubitHandle {
        let id = self.handles.len() as u32;
        self.handles.push(HandleSlot { meta, node: Some(node) });
        QubitHandle { id, meta }
    }

    /// Prepares `|g_label⟩`; the first returned handle is the left factor.
    pub fn alloc_bell(
        &mut self,
        label: BellLabel,
        left: QubitMeta,
        right: QubitMeta,
    ) -> (QubitHandle, QubitHandle) {
        let rho = DensityMatrix::from_pure(&bell_state_vector::<T>(label));
        let base = self.handles.len() as u32;
        let node = self.insert_node(JointState { handles: vec![base, base + 1], rho });
        (self.new_handle(left, node), self.new_handle(right, node))
    }

    pub fn alloc_pure(
        &mut self,
        spec: PureQubitSpec<T>,
        meta: QubitMeta,
    ) -> Result<QubitHandle, QuantumError> {
        if !spec.is_normalized() {
            return Err(QuantumError::NotNormalized(spec.norm_sqr().to_f64().unwrap_or(f64::NAN)));
        }
        let rho = DensityMatrix::from_pure(&[spec.alpha, spec.beta]);
        let id = self.handles.len() as u32;
        let node = self.insert_node(JointState { handles: vec![id], rho });
        Ok(self.new_handle(meta, node))
    }

    fn live_node(&self, h: QubitHandle) -> Result<usize, QuantumError> {
        let slot = self.handles.get(h.id as usize).ok_or(QuantumError::Unknown(h.id))?;
        slot.node.ok_or(QuantumError::Consumed(h.id))
    }

    pub fn is_live(&self, h: QubitHandle) -> bool {
        self.live_node(h).is_ok()
    }

    pub fn meta(&self, h: QubitHandle) -> Option<QubitMeta> {
        self.handles.get(h.id as usize).map(|s| s.meta)
    }

    /// The joint state currently holding `h`.
    pub fn joint_state(&self, h: QubitHandle) -> Result<&JointState<T>, QuantumError> {
        let n = self.live_node(h)?;
        Ok(self.nodes[n].as_ref().expect("live node"))
    }

    pub fn joint_states(&self) -> impl Iterator<Item = &JointState<T>> {
        self.nodes.iter().flatten()
    }

    pub fn live_handle_count(&self) -> usize {
        self.handles.iter().filter(|s| s.node.is_some()).count()
    }

    fn check_pair(&self, a: QubitHandle, b: QubitHandle) -> Result<(usize, usize), QuantumError> {
        if a.id == b.id {
            return Err(QuantumError::SameHandle(a.id));
        }
        Ok((self.live_node(a)?, self.live_node(b)?))
    }

    /// Outcome probabilities `[p(G0), p(G1), p(G2), p(G3)]` of a Bell
    /// measurement on `(a, b)`, with `a` as the left factor. Does not modify
    /// the heap.
    pub fn exact_bell_probabilities(
        &self,
        a: QubitHandle,
        b: QubitHandle,
    ) -> Result<[T; 4], QuantumError> {
        let (na, nb) = self.check_pair(a, b)?;
        let sa = self.nodes[na].as_ref().expect("live node");
        let pa = sa.position(a.id).expect("handle in its node");
        let pair = if na == nb {
            let pb = sa.position(b.id).expect("handle in its node");
            sa.rho.partial_trace(&[pa, pb])
        } else {
            let sb = self.nodes[nb].as_ref().expect("live node");
            let pb = sb.position(b.id).expect("handle in its node");
            sa.rho.partial_trace(&[pa]).tensor(&sb.rho.partial_trace(&[pb]))
        };
        Ok(BellLabel::ALL.map(|l| pair.expectation(&bell_state_vector::<T>(l))))
    }

    /// Merges the nodes of `a` and `b` (if distinct), `a`'s node as left factor.
    fn merge_for(&mut self, a: QubitHandle, b: QubitHandle) -> Result<usize, QuantumError> {
        let (na, nb) = self.check_pair(a, b)?;
        if na == nb {
            return Ok(na);
        }
        let qa = self.nodes[na].as_ref().unwrap().handles.len();
        let qb = self.nodes[nb].as_ref().unwrap().handles.len();
        if qa + qb > MAX_JOINT_QUBITS {
            return Err(QuantumError::TooManyQubits(qa + qb));
        }
        let left = self.remove_node(na);
        let right = self.remove_node(nb);
        let mut handles = left.handles;
        handles.extend_from_slice(&right.handles);
        let merged = JointState { rho: left.rho.tensor(&right.rho), handles };
        let node = self.insert_node(merged);
        for &h in &self.nodes[node].as_ref().unwrap().handles {
            self.handles[h as usize].node = Some(node);
        }
        Ok(node)
    }

    /// Bell-basis measurement of `(a, b)`. Samples an outcome with the heap's
    /// stream, collapses spectators onto the post-measurement state and
    /// consumes both handles.
    pub fn measure_bell(&mut self, a: QubitHandle, b: QubitHandle) -> Result<BellLabel, QuantumError> {
        let node = self.merge_for(a, b)?;
        let state = self.remove_node(node);
        let pa = state.position(a.id).unwrap();
        let pb = state.position(b.id).unwrap();

        if state.handles.len() == 2 {
            let probs = state.rho.bell_probabilities().map(|p| p.max(T::zero()));
            let k = self.sample(&probs);
            self.handles[a.id as usize].node = None;
            self.handles[b.id as usize].node = None;
            return Ok(BellLabel::from_index(k).unwrap());
        }

        let branches = BellLabel::ALL.map(|l| state.rho.contract_pair(pa, pb, &bell_state_vector::<T>(l)));
        let probs = branches.each_ref().map(|r| r.trace().re.max(T::zero()));
        let k = self.sample(&probs);

        self.handles[a.id as usize].node = None;
        self.handles[b.id as usize].node = None;
        let rest: Vec<u32> = state
            .handles
            .iter()
            .copied()
            .filter(|&h| h != a.id && h != b.id)
            .collect();
        let [b0, b1, b2, b3] = branches;
        let mut rho = [b0, b1, b2, b3].into_iter().nth(k).unwrap();
        rho.scale(T::one() / probs[k]);
        let node = self.insert_node(JointState { handles: rest, rho });
        for &h in &self.nodes[node].as_ref().unwrap().handles {
            self.handles[h as usize].node = Some(node);
        }
        Ok(BellLabel::from_index(k).unwrap())
    }

    /// Draws an index among entries at or above the null-probability floor.
    fn sample(&mut self, probs: &[T; 4]) -> usize {
        let floor = T::null_probability();
        let total: f64 = probs
            .iter()
            .filter(|&&p| p >= floor)
            .map(|p| p.to_f64().unwrap())
            .sum();
        let mut u = self.rng.random::<f64>() * total;
        let mut pick = None;
        for (k, p) in probs.iter().enumerate() {
            if *p < floor {
                continue;
            }
            pick = Some(k);
            let pf = p.to_f64().unwrap();
            if u < pf {
                break;
            }
            u -= pf;
        }
        pick.expect("at least one outcome has nonzero probability")
    }

    /// Traces `h` out of its joint state and consumes it.
    pub fn discard(&mut self, h: QubitHandle) -> Result<(), QuantumError> {
        let node = self.live_node(h)?;
        let state = self.remove_node(node);
        self.handles[h.id as usize].node = None;
        let keep: Vec<usize> = (0..state.handles.len()).filter(|&p| state.handles[p] != h.id).collect();
        if !keep.is_empty() {
            let handles: Vec<u32> = keep.iter().map(|&p| state.handles[p]).collect();
            let rho = state.rho.partial_trace(&keep);
            let node = self.insert_node(JointState { handles, rho });
            for &h in &self.nodes[node].as_ref().unwrap().handles {
                self.handles[h as usize].node = Some(node);
            }
        }
        Ok(())
    }

    /// Verifies every node is a valid density matrix within the dimension cap.
    pub fn validate(&self) -> Result<(), QuantumError> {
        for (i, state) in self.nodes.iter().enumerate() {
            let Some(state) = state else { continue };
            if state.handles.len() > MAX_JOINT_QUBITS {
                return Err(QuantumError::TooManyQubits(state.handles.len()));
            }
            if !state.rho.is_valid_state() {
                return Err(QuantumError::InvalidState(i));
            }
        }
        Ok(())
    }
}
