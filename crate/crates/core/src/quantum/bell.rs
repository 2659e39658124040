use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// One of the four Bell states.
///
/// Amplitudes are over the basis `|00⟩, |01⟩, |10⟩, |11⟩` with the left factor
/// belonging to the first party:
///
/// * `G0 = (|00⟩ + |11⟩)/√2`
/// * `G1 = (|00⟩ − |11⟩)/√2`
/// * `G2 = (|01⟩ + |10⟩)/√2`
/// * `G3 = (|01⟩ − |10⟩)/√2`
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    G0,
    G1,
    G2,
    G3,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::G0, BellLabel::G1, BellLabel::G2, BellLabel::G3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> Option<Self> {
        Self::ALL.get(k).copied()
    }

    /// The label carrying a function bit: `G0` for 0, `G1` for 1.
    pub fn for_bit(bit: u8) -> Self {
        if bit == 0 {
            BellLabel::G0
        } else {
            BellLabel::G1
        }
    }

    /// Inverse of [`BellLabel::for_bit`].
    pub fn bit(self) -> Option<u8> {
        match self {
            BellLabel::G0 => Some(0),
            BellLabel::G1 => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.index())
    }
}

/// Unit amplitude vector of a Bell state.
pub fn bell_state_vector<T: Real>(label: BellLabel) -> [Complex<T>; 4] {
    let h = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let c = |x: T| Complex::new(x, z);
    match label {
        BellLabel::G0 => [c(h), c(z), c(z), c(h)],
        BellLabel::G1 => [c(h), c(z), c(z), c(-h)],
        BellLabel::G2 => [c(z), c(h), c(h), c(z)],
        BellLabel::G3 => [c(z), c(h), c(-h), c(z)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner(a: &[Complex<f64>; 4], b: &[Complex<f64>; 4]) -> Complex<f64> {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn g0_and_g3_amplitudes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g0 = bell_state_vector::<f64>(BellLabel::G0);
        assert_eq!(g0.map(|z| z.re), [h, 0.0, 0.0, h]);
        let g3 = bell_state_vector::<f64>(BellLabel::G3);
        assert_eq!(g3.map(|z| z.re), [0.0, h, -h, 0.0]);
    }

    #[test]
    fn orthonormal_basis() {
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let ip = inner(&bell_state_vector(a), &bell_state_vector(b));
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip.re - expect).abs() < 1e-12 && ip.im.abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn bit_round_trip() {
        assert_eq!(BellLabel::for_bit(0).bit(), Some(0));
        assert_eq!(BellLabel::for_bit(1).bit(), Some(1));
        assert_eq!(BellLabel::G2.bit(), None);
    }
}
