//! Closed-form detection probabilities, expected utilities and bounds on γ.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::scalar::UtilityScalar;

/// One party's payoffs for the four (self, other) learning outcomes.
///
/// `T` means the party ends with the correct value, `N` that it does not;
/// the first letter is the party itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utilities<T> {
    pub tt: T,
    pub tn: T,
    pub nt: T,
    pub nn: T,
}

impl<T: UtilityScalar> Utilities<T> {
    pub fn new(tn: T, tt: T, nn: T, nt: T) -> Self {
        Self { tt, tn, nt, nn }
    }

    /// Checks `U^TN > U^TT > U^NN > U^NT`, naming the first failing link.
    pub fn check_r1(&self) -> Result<(), AnalysisError> {
        let links = [
            (self.tn > self.tt, "U^TN > U^TT"),
            (self.tt > self.nn, "U^TT > U^NN"),
            (self.nn > self.nt, "U^NN > U^NT"),
        ];
        match links.iter().find(|(ok, _)| !ok) {
            Some((_, name)) => Err(AnalysisError::PreferenceViolation(name)),
            None => Ok(()),
        }
    }

    /// Payoff for a (self correct, other correct) pair.
    pub fn payoff(&self, own: bool, other: bool) -> T {
        match (own, other) {
            (true, true) => self.tt,
            (true, false) => self.tn,
            (false, true) => self.nt,
            (false, false) => self.nn,
        }
    }
}

fn frac<T: UtilityScalar>(num: i64, den: i64) -> T {
    T::lit(num) / T::lit(den)
}

fn check_gamma<T: UtilityScalar>(gamma: T) -> Result<(), AnalysisError> {
    if gamma > T::zero() && gamma < T::one() {
        Ok(())
    } else {
        Err(AnalysisError::GammaOutOfRange(format!("{gamma:?}")))
    }
}

/// Probability that the honest party detects a forged qubit sent in a
/// uniformly random round, counting only detections up to its own
/// revelation index `j`: `(3j − 1)/(4m)`.
pub fn detection_prob_mp_nonrational<T: UtilityScalar>(j: u32, m: u32) -> Result<T, AnalysisError> {
    if j == 0 || j > m {
        return Err(AnalysisError::OutOfRange(format!("need 1 <= j <= m, got j={j}, m={m}")));
    }
    Ok(frac(3 * j as i64 - 1, 4 * m as i64))
}

/// Detection probability for a forgery sent in the fixed round `l` when the
/// honest party reveals at `j`: `3/4` before `j`, `1/2` at `j`, nothing
/// counted after.
pub fn detection_prob_mp_at_round<T: UtilityScalar>(l: u32, j: u32) -> T {
    match l.cmp(&j) {
        std::cmp::Ordering::Less => frac(3, 4),
        std::cmp::Ordering::Equal => frac(1, 2),
        std::cmp::Ordering::Greater => T::zero(),
    }
}

/// The P1-side expression as sometimes stated without the factor 4,
/// `(3i − 1)/m`. Reported for comparison only.
pub fn detection_prob_mp_unscaled<T: UtilityScalar>(i: u32, m: u32) -> Result<T, AnalysisError> {
    if i == 0 || i > m {
        return Err(AnalysisError::OutOfRange(format!("need 1 <= i <= m, got i={i}, m={m}")));
    }
    Ok(frac(3 * i as i64 - 1, m as i64))
}

/// Detection probability for the rational millionaires' protocol.
pub fn detection_prob_rational_mp<T: UtilityScalar>() -> T {
    frac(1, 4)
}

/// Detection probability for the embedded-XOR protocol.
pub fn detection_prob_xor<T: UtilityScalar>() -> T {
    frac(1, 2)
}

/// Expected utility of a P1 that commits to aborting before it can know
/// whether the current round reveals: `U^NN (1 − γ) + U^TN γ`.
pub fn expected_abort_utility_rational_mp<T: UtilityScalar>(u: &Utilities<T>, gamma: T) -> Result<T, AnalysisError> {
    u.check_r1()?;
    check_gamma(gamma)?;
    Ok(u.nn * (T::one() - gamma) + u.tn * gamma)
}

/// Largest γ for which aborting is unprofitable in the rational
/// millionaires' protocol: `(U^TT − U^NN)/(U^TN − U^NN)`.
pub fn fairness_gamma_bound_rational_mp<T: UtilityScalar>(u: &Utilities<T>) -> Result<T, AnalysisError> {
    u.check_r1()?;
    Ok((u.tt - u.nn) / (u.tn - u.nn))
}

/// Whether `γ U^TN + (1 − γ) U^NN < U^TT`.
pub fn rational_mp_condition<T: UtilityScalar>(u: &Utilities<T>, gamma: T) -> bool {
    gamma * u.tn + (T::one() - gamma) * u.nn < u.tt
}

/// The alternative form `U^TN + (1 − γ) U^NN < U^TT`, which cannot hold
/// under R1 when `U^NN ≥ 0`.
pub fn rational_mp_condition_alt<T: UtilityScalar>(u: &Utilities<T>, gamma: T) -> bool {
    u.tn + (T::one() - gamma) * u.nn < u.tt
}

/// P1's input row for the embedded XOR abort analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XorCase {
    X1OrX2,
    X3,
}

/// Expected utility of P1 aborting early in the rational embedded-XOR
/// protocol.
pub fn expected_abort_utility_xor<T: UtilityScalar>(u: &Utilities<T>, gamma: T, case: XorCase) -> Result<T, AnalysisError> {
    u.check_r1()?;
    check_gamma(gamma)?;
    Ok(match case {
        XorCase::X3 => u.tt,
        XorCase::X1OrX2 => {
            let four = T::lit(4);
            (T::one() + gamma) / four * (u.tn + u.tt) + (T::one() - gamma) / four * (u.nn + u.nt)
        }
    })
}

/// Whether `(U^TT − U^NN) + (U^TT − U^NT) > (U^TN − U^TT)`, the condition for
/// a positive γ bound in the embedded XOR.
pub fn xor_bound_precondition<T: UtilityScalar>(u: &Utilities<T>) -> bool {
    (u.tt - u.nn) + (u.tt - u.nt) > (u.tn - u.tt)
}

/// `(3U^TT − U^TN − U^NN − U^NT)/(U^TN + U^TT − U^NN − U^NT)`.
pub fn fairness_gamma_bound_xor<T: UtilityScalar>(u: &Utilities<T>) -> Result<T, AnalysisError> {
    u.check_r1()?;
    let three = T::lit(3);
    let num = three * u.tt - u.tn - u.nn - u.nt;
    if num < T::zero() {
        return Err(AnalysisError::NoValidGamma);
    }
    Ok(num / (u.tn + u.tt - u.nn - u.nt))
}
