use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    count_trials, ideal_world_mp, ideal_world_xor, mp_subcase, tv_distance, AbortPosition, AnalysisError,
    OutcomeDistribution, XorInputChoice,
};
use crate::adversary::{AdversaryStrategy, RoundChoice};
use crate::protocol::{
    check_gamma, run_trial, sample_schedule, stream_rng, streams, MillionaireInputs, Party, ProtocolSetup,
    QepVariant, ScheduleSource, WorldOutcome, XorInputs,
};

/// One abort configuration to compare between the real protocol and the
/// trusted-party model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AuditCase {
    Mp { inputs: MillionaireInputs, abort: Option<(Party, u32)> },
    Xor { inputs: XorInputChoice, gamma: f64, abort: Option<(Party, AbortPosition)> },
}

impl AuditCase {
    pub fn label(&self) -> String {
        match self {
            AuditCase::Mp { inputs, abort: None } => format!("mp i={} j={} m={} honest", inputs.i, inputs.j, inputs.m),
            AuditCase::Mp { inputs, abort: Some((p, l)) } => format!(
                "mp i={} j={} m={} {p} aborts l={l} [{}]",
                inputs.i,
                inputs.j,
                inputs.m,
                mp_subcase(inputs.i, inputs.j, *p, *l)
            ),
            AuditCase::Xor { inputs, gamma, abort } => {
                let inputs = match inputs {
                    XorInputChoice::Fixed(x) => format!("x={} y={}", x.x, x.y),
                    XorInputChoice::Uniform => "uniform inputs".to_string(),
                };
                let abort = match abort {
                    None => "honest".to_string(),
                    Some((p, AbortPosition::AtR)) => format!("{p} aborts at r"),
                    Some((p, AbortPosition::BeforeR)) => format!("{p} aborts before r"),
                };
                format!("xor {inputs} gamma={gamma} {abort}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub case: AuditCase,
    pub tv: f64,
    pub hybrid: OutcomeDistribution,
    pub ideal: OutcomeDistribution,
}

/// Every P1 and P2 abort round for every `(i, j)` with `m` rounds, plus the
/// honest runs.
pub fn mp_audit_grid(m: u32) -> Vec<AuditCase> {
    let mut cases = Vec::new();
    for i in 1..=m {
        for j in 1..=m {
            let inputs = MillionaireInputs { i, j, m };
            cases.push(AuditCase::Mp { inputs, abort: None });
            for party in Party::BOTH {
                for l in 1..=m {
                    cases.push(AuditCase::Mp { inputs, abort: Some((party, l)) });
                }
            }
        }
    }
    cases
}

/// Honest, before-`r` and at-`r` aborts by either party over uniform inputs.
pub fn xor_audit_cases(gamma: f64) -> Vec<AuditCase> {
    let mut cases = vec![AuditCase::Xor { inputs: XorInputChoice::Uniform, gamma, abort: None }];
    for party in Party::BOTH {
        for position in [AbortPosition::BeforeR, AbortPosition::AtR] {
            cases.push(AuditCase::Xor { inputs: XorInputChoice::Uniform, gamma, abort: Some((party, position)) });
        }
    }
    cases
}

fn abort_at(l: u32) -> AdversaryStrategy {
    AdversaryStrategy::AbortAt { round: RoundChoice::Fixed(l) }
}

/// Draws inputs, a schedule and an abort round for one embedded-XOR trial.
///
/// The schedule is redrawn until the requested position exists: an abort
/// before `r` needs `r ≥ 2`, and a P2 abort additionally needs an earlier
/// round to have been seen, so it starts at round 2.
fn xor_trial_plan<R: Rng + ?Sized>(
    inputs: XorInputChoice,
    gamma: f64,
    abort: Option<(Party, AbortPosition)>,
    rng: &mut R,
) -> Result<(XorInputs, crate::protocol::RoundSchedule, Option<(Party, u32)>), AnalysisError> {
    let inputs = match inputs {
        XorInputChoice::Fixed(x) => x,
        XorInputChoice::Uniform => XorInputs::random(rng),
    };
    let (min_r, first) = match abort {
        None => (1, 1),
        Some((Party::P1, AbortPosition::AtR)) => (1, 1),
        Some((Party::P1, AbortPosition::BeforeR)) => (2, 1),
        Some((Party::P2, AbortPosition::AtR)) => (2, 2),
        Some((Party::P2, AbortPosition::BeforeR)) => (3, 2),
    };
    let schedule = loop {
        let s = sample_schedule(gamma, rng)?;
        if s.r >= min_r {
            break s;
        }
    };
    let abort = abort.map(|(party, position)| {
        let l = match position {
            AbortPosition::AtR => schedule.r,
            AbortPosition::BeforeR => rng.random_range(first..schedule.r),
        };
        (party, l)
    });
    Ok((inputs, schedule, abort))
}

fn hybrid_outcome(case: &AuditCase, seed: u64) -> Result<WorldOutcome, AnalysisError> {
    let mut strategies = [AdversaryStrategy::Honest; 2];
    let setup = match *case {
        AuditCase::Mp { inputs, abort } => {
            if let Some((party, l)) = abort {
                strategies[party.index()] = abort_at(l);
            }
            ProtocolSetup::Qmp { inputs }
        }
        AuditCase::Xor { inputs, gamma, abort } => {
            let mut rng = stream_rng(seed, streams::EXPERIMENT);
            let (inputs, schedule, abort) = xor_trial_plan(inputs, gamma, abort, &mut rng)?;
            if let Some((party, l)) = abort {
                strategies[party.index()] = abort_at(l);
            }
            ProtocolSetup::Qep { inputs, variant: QepVariant::Qep, schedule: ScheduleSource::Fixed(schedule) }
        }
    };
    Ok(run_trial::<f64>(&setup, &strategies, seed)?.outcome())
}

fn ideal_outcome(case: &AuditCase, seed: u64) -> Result<WorldOutcome, AnalysisError> {
    match *case {
        AuditCase::Mp { inputs, abort } => ideal_world_mp(inputs.i, inputs.j, inputs.m, abort),
        AuditCase::Xor { inputs, abort, .. } => {
            let mut rng = stream_rng(seed, streams::IDEAL);
            let inputs = match inputs {
                XorInputChoice::Fixed(x) => x,
                XorInputChoice::Uniform => XorInputs::random(&mut rng),
            };
            ideal_world_xor(&inputs, abort, &mut rng)
        }
    }
}

/// Runs the protocol and the trusted-party model `trials` times each under
/// the same abort behavior and returns the total variation distance between
/// the two outcome distributions.
pub fn fairness_audit(case: &AuditCase, trials: u64, seed: u64) -> Result<AuditResult, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::OutOfRange("trials must be at least 1".into()));
    }
    match case {
        AuditCase::Mp { inputs, abort } => {
            inputs.validate()?;
            if let Some((_, l)) = abort {
                if *l == 0 || *l > inputs.m {
                    return Err(AnalysisError::OutOfRange(format!("abort round {l} outside 1..={}", inputs.m)));
                }
            }
        }
        AuditCase::Xor { inputs, gamma, .. } => {
            check_gamma(*gamma)?;
            if let XorInputChoice::Fixed(x) = inputs {
                x.validate()?;
            }
        }
    }
    let hybrid = OutcomeDistribution::from_counts(count_trials(trials, seed, |s| hybrid_outcome(case, s))?);
    let ideal = OutcomeDistribution::from_counts(count_trials(trials, seed, |s| ideal_outcome(case, s))?);
    Ok(AuditResult { case: *case, tv: tv_distance(&hybrid, &ideal), hybrid, ideal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_size() {
        assert_eq!(mp_audit_grid(3).len(), 9 * (1 + 6));
        assert_eq!(xor_audit_cases(0.3).len(), 5);
    }

    #[test]
    fn small_mp_grid_matches_exactly() {
        for case in mp_audit_grid(3) {
            let r = fairness_audit(&case, 50, 1).unwrap();
            assert_eq!(r.tv, 0.0, "{}", case.label());
        }
    }

    #[test]
    fn xor_plan_respects_positions() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..500 {
            let (_, s, abort) =
                xor_trial_plan(XorInputChoice::Uniform, 0.5, Some((Party::P2, AbortPosition::BeforeR)), &mut rng).unwrap();
            let (_, l) = abort.unwrap();
            assert!(l >= 2 && l < s.r);
        }
    }

    #[test]
    fn rejects_bad_cases() {
        let inputs = MillionaireInputs { i: 1, j: 1, m: 2 };
        assert!(fairness_audit(&AuditCase::Mp { inputs, abort: Some((Party::P1, 3)) }, 10, 0).is_err());
        let x = AuditCase::Xor { inputs: XorInputChoice::Uniform, gamma: 1.5, abort: None };
        assert!(fairness_audit(&x, 10, 0).is_err());
    }
}
