use super::{count_trials, AnalysisError, Proportion, Scenario};
use crate::adversary::AdversaryStrategy;
use crate::protocol::{run_trial, Party, ProtocolSetup, TrialResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Tally {
    Ineligible,
    Miss,
    Hit,
}

/// Last round in which a detection by `honest` still matters to it: its own
/// revelation index in the millionaires' protocol, `r` otherwise.
pub fn detection_horizon(setup: &ProtocolSetup, trial: &TrialResult, honest: Party) -> u32 {
    match setup {
        ProtocolSetup::Qmp { inputs } => match honest {
            Party::P1 => inputs.i,
            Party::P2 => inputs.j,
        },
        _ => trial.schedule.map_or(trial.m, |s| s.r),
    }
}

fn tally(setup: &ProtocolSetup, trial: &TrialResult, attacker: Party) -> Tally {
    let honest = attacker.other();
    let horizon = detection_horizon(setup, trial, honest);
    if setup.is_rational() {
        match trial.execution.first_deviation {
            Some((_, l)) if l <= horizon => {}
            _ => return Tally::Ineligible,
        }
    }
    match trial.execution.report {
        Some((who, l)) if who == honest && l <= horizon => Tally::Hit,
        _ => Tally::Miss,
    }
}

/// Fraction of runs in which the honest party reports forgery no later than
/// its detection horizon.
///
/// In the millionaires' protocol every run counts. In the rational protocols
/// only runs whose first deviation happens at or before `r` count, since a
/// deviation after the revelation round cannot change anyone's output.
pub fn estimate_detection(
    scenario: &Scenario,
    attacker: Party,
    strategy: &AdversaryStrategy,
    trials: u64,
    seed: u64,
) -> Result<Proportion, AnalysisError> {
    scenario.validate()?;
    if trials == 0 {
        return Err(AnalysisError::OutOfRange("trials must be at least 1".into()));
    }
    let mut strategies = [AdversaryStrategy::Honest; 2];
    strategies[attacker.index()] = *strategy;
    let counts = count_trials(trials, seed, |s| {
        let setup = scenario.setup(s);
        let trial = run_trial::<f64>(&setup, &strategies, s)?;
        Ok::<_, AnalysisError>(tally(&setup, &trial, attacker))
    })?;
    let get = |k| counts.get(&k).copied().unwrap_or(0);
    Ok(Proportion::new(get(Tally::Hit), get(Tally::Hit) + get(Tally::Miss)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ForgeSpec, RoundChoice};
    use crate::protocol::MillionaireInputs;

    #[test]
    fn honest_runs_are_never_detected() {
        let scenario = Scenario::Qmp { inputs: MillionaireInputs::new(2, 2, 3).unwrap() };
        let p = estimate_detection(&scenario, Party::P1, &AdversaryStrategy::Honest, 200, 1).unwrap();
        assert_eq!(p.hits, 0);
        assert_eq!(p.total, 200);
    }

    #[test]
    fn single_round_forgery() {
        let scenario = Scenario::Qmp { inputs: MillionaireInputs::new(1, 1, 1).unwrap() };
        let s = AdversaryStrategy::ForgeArbitraryQubit { round: RoundChoice::UniformRandom, spec: ForgeSpec::HaarRandom };
        let p = estimate_detection(&scenario, Party::P1, &s, 20_000, 2).unwrap();
        assert!((p.estimate - 0.5).abs() < 4.0 * p.stderr, "{p:?}");
    }

    #[test]
    fn zero_trials_rejected() {
        let scenario = Scenario::Qmp { inputs: MillionaireInputs::new(1, 1, 1).unwrap() };
        assert!(estimate_detection(&scenario, Party::P1, &AdversaryStrategy::Honest, 0, 0).is_err());
    }
}
