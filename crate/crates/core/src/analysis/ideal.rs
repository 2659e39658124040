//! Ideal-world outcomes: what a trusted party would hand out under the same
//! abort behavior.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::protocol::{
    eval_embedded_xor, eval_greater_than, random_x, random_y, MillionaireInputs, Party, PartyOutcome,
    WorldOutcome, XorInputs,
};

/// Ideal outcome of the millionaires' problem when `abort` names the aborting
/// party and round.
///
/// A P1 abort at `l` leaves P2 with `f(l, j)` unless P2 already received
/// `f` at round `j < l`; P1 keeps `f` if `l ≥ i`.
/// A P2 abort at `l` leaves P1 with `f` if `i < l` and with 1 otherwise; P2
/// keeps `f` if `j < l`.
pub fn ideal_world_mp(i: u32, j: u32, m: u32, abort: Option<(Party, u32)>) -> Result<WorldOutcome, AnalysisError> {
    let inputs = MillionaireInputs::new(i, j, m).map_err(AnalysisError::Protocol)?;
    let f = inputs.value();
    let Some((party, l)) = abort else {
        return Ok(WorldOutcome::values(f, f));
    };
    if l == 0 || l > m {
        return Err(AnalysisError::OutOfRange(format!("abort round {l} outside 1..={m}")));
    }
    let kept = |held: bool| if held { PartyOutcome::Value(f) } else { PartyOutcome::Null };
    Ok(match party {
        Party::P1 => {
            let p2 = if j < l { f } else { eval_greater_than(l, j) };
            WorldOutcome::new(kept(l >= i), PartyOutcome::Value(p2))
        }
        Party::P2 => WorldOutcome::new(PartyOutcome::Value(if i < l { f } else { 1 }), kept(j < l)),
    })
}

/// Label of the case an MP abort falls into.
pub fn mp_subcase(i: u32, j: u32, party: Party, l: u32) -> &'static str {
    match party {
        Party::P1 if i <= j => match l {
            l if l < i => "1(a)",
            l if l == i => "1(b)",
            _ => "1(c)",
        },
        Party::P1 => match l {
            l if l <= j => "2(a)",
            l if l < i => "2(b)",
            l if l == i => "2(c)",
            _ => "2(c+)",
        },
        Party::P2 => match (l <= i, j < l) {
            (true, true) => "P2:l<=i,j<l",
            (true, false) => "P2:l<=i,l<=j",
            (false, true) => "P2:i<l,j<l",
            (false, false) => "P2:i<l,l<=j",
        },
    }
}

/// Where an embedded-XOR abort happens relative to the revelation round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbortPosition {
    BeforeR,
    AtR,
}

/// Ideal outcome of the embedded XOR under an abort, drawing the dealer's
/// placeholder inputs `x̂`, `ŷ` from `rng`.
///
/// For a P2 abort the aborter is taken to have seen at least one earlier
/// round, so both parties hold placeholder values.
pub fn ideal_world_xor<R: Rng + ?Sized>(
    inputs: &XorInputs,
    abort: Option<(Party, AbortPosition)>,
    rng: &mut R,
) -> Result<WorldOutcome, AnalysisError> {
    inputs.validate().map_err(AnalysisError::Protocol)?;
    let f = inputs.value();
    let Some((party, position)) = abort else {
        return Ok(WorldOutcome::values(f, f));
    };
    let a_hat = eval_embedded_xor(inputs.x, random_y(rng));
    let b_hat = eval_embedded_xor(random_x(rng), inputs.y);
    Ok(match (party, position) {
        (Party::P1, AbortPosition::BeforeR) => WorldOutcome::values(a_hat, b_hat),
        (Party::P1, AbortPosition::AtR) => WorldOutcome::values(f, b_hat),
        (Party::P2, _) => WorldOutcome::values(a_hat, b_hat),
    })
}
