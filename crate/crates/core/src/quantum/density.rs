//! Dense density matrices over a handful of qubits.
//!
//! Qubit position 0 is the leftmost tensor factor, i.e. the most significant
//! bit of a basis index.

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    qubits: usize,
    data: Vec<Complex<T>>,
}

#[inline]
fn bit_of(index: usize, position: usize, qubits: usize) -> usize {
    (index >> (qubits - 1 - position)) & 1
}

#[inline]
fn place(bit: usize, position: usize, qubits: usize) -> usize {
    bit << (qubits - 1 - position)
}

/// For every basis index of the `positions` subsystem, the full-register bits it sets.
fn subsystem_offsets(positions: &[usize], qubits: usize) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|sub| {
            positions
                .iter()
                .enumerate()
                .map(|(p, &pos)| place(bit_of(sub, p, k), pos, qubits))
                .sum()
        })
        .collect()
}

fn complement(positions: &[usize], qubits: usize) -> Vec<usize> {
    (0..qubits).filter(|q| !positions.contains(q)).collect()
}

impl<T: Real> DensityMatrix<T> {
    /// `|ψ⟩⟨ψ|` for a state vector of length `2^k`.
    pub fn from_pure(amplitudes: &[Complex<T>]) -> Self {
        let dim = amplitudes.len();
        assert!(dim.is_power_of_two() && dim > 0, "state vector length must be 2^k");
        let qubits = dim.trailing_zeros() as usize;
        let mut data = vec![Complex::zero(); dim * dim];
        for (r, a) in amplitudes.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (c, b) in amplitudes.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                data[r * dim + c] = *a * b.conj();
            }
        }
        Self { qubits, data }
    }

    /// `I / 2^k`.
    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut data = vec![Complex::zero(); dim * dim];
        let v = T::one() / T::from_usize(dim).unwrap();
        for i in 0..dim {
            data[i * dim + i] = Complex::new(v, T::zero());
        }
        Self { qubits, data }
    }

    /// Builds from row-major entries; `entries.len()` must be `4^k`.
    pub fn from_entries(qubits: usize, entries: Vec<Complex<T>>) -> Self {
        let dim = 1usize << qubits;
        assert_eq!(entries.len(), dim * dim, "entry count does not match qubit count");
        Self { qubits, data: entries }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).map(|i| self.get(i, i)).fold(Complex::zero(), |a, b| a + b)
    }

    pub fn scale(&mut self, factor: T) {
        for z in &mut self.data {
            *z = *z * factor;
        }
    }

    /// `self ⊗ other`, with `self` as the left factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut data = vec![Complex::zero(); dim * dim];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.get(ar, ac);
                if a.is_zero() {
                    continue;
                }
                for br in 0..db {
                    let row = (ar * db + br) * dim;
                    for bc in 0..db {
                        data[row + ac * db + bc] = a * other.get(br, bc);
                    }
                }
            }
        }
        Self { qubits: self.qubits + other.qubits, data }
    }

    /// Reduced state on `keep`, ordered as given. Positions must be distinct and in range.
    pub fn partial_trace(&self, keep: &[usize]) -> Self {
        let n = self.qubits;
        debug_assert!(keep.iter().all(|&p| p < n));
        let traced = complement(keep, n);
        let keep_off = subsystem_offsets(keep, n);
        let trace_off = subsystem_offsets(&traced, n);
        let kd = keep_off.len();
        let mut data = vec![Complex::zero(); kd * kd];
        for (i, &ri) in keep_off.iter().enumerate() {
            for (j, &cj) in keep_off.iter().enumerate() {
                let mut acc = Complex::zero();
                for &t in &trace_off {
                    acc = acc + self.get(ri | t, cj | t);
                }
                data[i * kd + j] = acc;
            }
        }
        Self { qubits: keep.len(), data }
    }

    /// Unnormalised state of the remaining qubits after projecting positions
    /// `(a, b)` onto `|v⟩`: `⟨v|_{ab} ρ |v⟩_{ab}`. Its trace is the outcome
    /// probability.
    pub fn contract_pair(&self, a: usize, b: usize, v: &[Complex<T>; 4]) -> Self {
        let n = self.qubits;
        let rest = complement(&[a, b], n);
        let rest_off = subsystem_offsets(&rest, n);
        let pair_off = subsystem_offsets(&[a, b], n);
        let rd = rest_off.len();
        let mut data = vec![Complex::zero(); rd * rd];
        for (i, &ri) in rest_off.iter().enumerate() {
            for (j, &cj) in rest_off.iter().enumerate() {
                let mut acc = Complex::zero();
                for (s, &ps) in pair_off.iter().enumerate() {
                    let vs = v[s].conj();
                    if vs.is_zero() {
                        continue;
                    }
                    for (t, &pt) in pair_off.iter().enumerate() {
                        if v[t].is_zero() {
                            continue;
                        }
                        acc = acc + vs * self.get(ri | ps, cj | pt) * v[t];
                    }
                }
                data[i * rd + j] = acc;
            }
        }
        Self { qubits: rest.len(), data }
    }

    /// `⟨ψ|ρ|ψ⟩` for a full-register vector.
    pub fn expectation(&self, psi: &[Complex<T>]) -> T {
        let d = self.dim();
        assert_eq!(psi.len(), d);
        let mut acc = Complex::zero();
        for r in 0..d {
            if psi[r].is_zero() {
                continue;
            }
            let left = psi[r].conj();
            for c in 0..d {
                if !psi[c].is_zero() {
                    acc = acc + left * self.get(r, c) * psi[c];
                }
            }
        }
        acc.re
    }

    /// Bell-basis outcome probabilities of a two-qubit state. The result does
    /// not depend on which qubit is taken as the left factor.
    pub fn bell_probabilities(&self) -> [T; 4] {
        assert_eq!(self.qubits, 2);
        let half = T::one() / (T::one() + T::one());
        let outer = self.get(0, 0).re + self.get(3, 3).re;
        let inner = self.get(1, 1).re + self.get(2, 2).re;
        let c03 = self.get(0, 3).re + self.get(0, 3).re;
        let c12 = self.get(1, 2).re + self.get(1, 2).re;
        [
            half * (outer + c03),
            half * (outer - c03),
            half * (inner + c12),
            half * (inner - c12),
        ]
    }

    pub fn max_hermitian_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, treating the matrix as Hermitian.
    ///
    /// Uses the real symmetric embedding `[[A, −B], [B, A]]` of `A + iB`,
    /// whose spectrum is that of the Hermitian matrix with doubled multiplicity.
    pub fn min_eigenvalue(&self) -> T {
        let d = self.dim();
        let n = 2 * d;
        let mut m = vec![T::zero(); n * n];
        for r in 0..d {
            for c in 0..d {
                let z = self.get(r, c);
                m[r * n + c] = z.re;
                m[(r + d) * n + c + d] = z.re;
                m[r * n + c + d] = -z.im;
                m[(r + d) * n + c] = z.im;
            }
        }
        // Symmetrise away rounding noise before the Jacobi sweeps.
        for r in 0..n {
            for c in r + 1..n {
                let avg = (m[r * n + c] + m[c * n + r]) / T::lit(2.0);
                m[r * n + c] = avg;
                m[c * n + r] = avg;
            }
        }
        jacobi_eigenvalues(&mut m, n)
            .into_iter()
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Checks trace and Hermiticity, then positivity, against the scalar's tolerances.
    pub fn is_valid_state(&self) -> bool {
        let tr = self.trace();
        (tr.re - T::one()).abs() <= T::trace_tol()
            && tr.im.abs() <= T::trace_tol()
            && self.max_hermitian_defect() <= T::hermitian_tol()
            && self.min_eigenvalue() >= -T::trace_tol()
    }
}

/// Cyclic Jacobi eigenvalue iteration on a real symmetric `n × n` matrix.
fn jacobi_eigenvalues<T: Real>(m: &mut [T], n: usize) -> Vec<T> {
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[r * n + c] * m[r * n + c])
            .fold(T::zero(), |a, b| a + b);
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}
