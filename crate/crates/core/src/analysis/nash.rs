use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    count_trials, fairness_gamma_bound_rational_mp, fairness_gamma_bound_xor, rational_mp_condition,
    rational_mp_condition_alt, xor_bound_precondition, AnalysisError, Scenario, Utilities,
};
use crate::adversary::{AdversaryStrategy, ForgeSpec, RoundChoice};
use crate::protocol::{run_trial, Party, PartyOutcome};

/// Counts of `(P1 correct, P2 correct)` over `trials` runs. A party is
/// correct when it ends holding the true function value.
pub fn correctness_counts(
    scenario: &Scenario,
    strategies: &[AdversaryStrategy; 2],
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<(bool, bool), u64>, AnalysisError> {
    scenario.validate()?;
    count_trials(trials, seed, |s| {
        let setup = scenario.setup(s);
        let f = setup.value();
        let outcome = run_trial::<f64>(&setup, strategies, s)?.outcome();
        let correct = |o: PartyOutcome| o == PartyOutcome::Value(f);
        Ok::<_, AnalysisError>((correct(outcome.p1), correct(outcome.p2)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl UtilityEstimate {
    fn from_counts(counts: &BTreeMap<(bool, bool), u64>, party: Party, u: &Utilities<f64>) -> Self {
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Self { mean: 0.0, stderr: 0.0, trials: 0 };
        }
        let payoff = |&(a, b): &(bool, bool)| match party {
            Party::P1 => u.payoff(a, b),
            Party::P2 => u.payoff(b, a),
        };
        let nf = n as f64;
        let mean = counts.iter().map(|(k, &c)| payoff(k) * c as f64).sum::<f64>() / nf;
        let var = counts.iter().map(|(k, &c)| (payoff(k) - mean).powi(2) * c as f64).sum::<f64>() / nf;
        Self { mean, stderr: (var / nf).sqrt(), trials: n }
    }
}

/// Expected utility of `party` when the parties play `strategies`.
///
/// Runs that end in a forgery report leave both parties without the value
/// and therefore score `U^NN` for each.
pub fn estimate_utility(
    scenario: &Scenario,
    strategies: &[AdversaryStrategy; 2],
    party: Party,
    u: &Utilities<f64>,
    trials: u64,
    seed: u64,
) -> Result<UtilityEstimate, AnalysisError> {
    let counts = correctness_counts(scenario, strategies, trials, seed)?;
    Ok(UtilityEstimate::from_counts(&counts, party, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrictlyDominated,
    InconclusiveAtThisSampleSize,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::StrictlyDominated => "strictly-dominated",
            Verdict::InconclusiveAtThisSampleSize => "inconclusive-at-this-sample-size",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashRow {
    pub deviant: Party,
    pub strategy: AdversaryStrategy,
    pub utility: UtilityEstimate,
    pub honest_utility: UtilityEstimate,
    pub verdict: Verdict,
}

/// A closed-form precondition or bound evaluated for one party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub party: Party,
    pub name: String,
    pub holds: bool,
    pub bound: Option<f64>,
    /// Reported for reference only; does not affect pass/fail.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub honest: [UtilityEstimate; 2],
    pub rows: Vec<NashRow>,
    pub conditions: Vec<Condition>,
}

impl NashReport {
    pub fn all_dominated(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::StrictlyDominated)
    }

    pub fn conditions_hold(&self) -> bool {
        self.conditions.iter().filter(|c| !c.informational).all(|c| c.holds)
    }

    pub fn row(&self, deviant: Party, strategy: &AdversaryStrategy) -> Option<&NashRow> {
        self.rows.iter().find(|r| r.deviant == deviant && &r.strategy == strategy)
    }
}

/// Deviations tried against the rational protocols.
pub fn default_catalog() -> Vec<AdversaryStrategy> {
    vec![
        AdversaryStrategy::AbortAt { round: RoundChoice::UniformRandom },
        AdversaryStrategy::AbortAtRevelation,
        AdversaryStrategy::ForgeArbitraryQubit { round: RoundChoice::UniformRandom, spec: ForgeSpec::HaarRandom },
        AdversaryStrategy::SwapShares { round: RoundChoice::UniformRandom },
    ]
}

fn conditions(scenario: &Scenario, party: Party, u: &Utilities<f64>, gamma: f64) -> Result<Vec<Condition>, AnalysisError> {
    let cond = |name: &str, holds: bool, bound: Option<f64>, informational: bool| Condition {
        party,
        name: name.to_string(),
        holds,
        bound,
        informational,
    };
    Ok(match scenario {
        Scenario::Qmp { .. } => unreachable!(),
        Scenario::Qrmp { .. } => {
            let bound = fairness_gamma_bound_rational_mp(u)?;
            vec![
                cond("1/4 < U^TT", 0.25 < u.tt, None, false),
                cond("gamma U^TN + (1-gamma) U^NN < U^TT", rational_mp_condition(u, gamma), Some(bound), false),
                cond("U^TN + (1-gamma) U^NN < U^TT", rational_mp_condition_alt(u, gamma), None, true),
            ]
        }
        Scenario::Qep { .. } => {
            let pre = xor_bound_precondition(u);
            let bound = if pre { Some(fairness_gamma_bound_xor(u)?) } else { None };
            vec![
                cond("1/2 < U^TT", 0.5 < u.tt, None, false),
                cond("(U^TT-U^NN) + (U^TT-U^NT) > (U^TN-U^TT)", pre, None, false),
                cond("gamma below XOR bound", bound.is_some_and(|b| gamma < b), bound, false),
            ]
        }
    })
}

/// Estimates every party's utility under each unilateral deviation in
/// `catalog` and compares it with the all-honest utility.
///
/// A deviation is strictly dominated when its estimate plus three standard
/// errors stays below the honest estimate.
pub fn nash_check(
    scenario: &Scenario,
    utilities: [Utilities<f64>; 2],
    catalog: &[AdversaryStrategy],
    trials: u64,
    seed: u64,
) -> Result<NashReport, AnalysisError> {
    scenario.validate()?;
    let Some(gamma) = scenario.gamma() else {
        return Err(AnalysisError::Unsupported("equilibrium analysis needs a rational protocol".into()));
    };
    if trials == 0 {
        return Err(AnalysisError::OutOfRange("trials must be at least 1".into()));
    }
    for u in &utilities {
        u.check_r1()?;
    }
    for s in catalog {
        s.validate().map_err(AnalysisError::OutOfRange)?;
    }

    let honest_counts = correctness_counts(scenario, &[AdversaryStrategy::Honest; 2], trials, seed)?;
    let honest = Party::BOTH.map(|p| UtilityEstimate::from_counts(&honest_counts, p, &utilities[p.index()]));

    let mut rows = Vec::new();
    for deviant in Party::BOTH {
        for strategy in catalog {
            let mut strategies = [AdversaryStrategy::Honest; 2];
            strategies[deviant.index()] = *strategy;
            let utility = estimate_utility(scenario, &strategies, deviant, &utilities[deviant.index()], trials, seed)?;
            let base = honest[deviant.index()];
            let verdict = if utility.mean + 3.0 * utility.stderr < base.mean - 3.0 * base.stderr {
                Verdict::StrictlyDominated
            } else {
                Verdict::InconclusiveAtThisSampleSize
            };
            rows.push(NashRow { deviant, strategy: *strategy, utility, honest_utility: base, verdict });
        }
    }

    let mut conds = Vec::new();
    for p in Party::BOTH {
        conds.extend(conditions(scenario, p, &utilities[p.index()], gamma)?);
    }
    Ok(NashReport { honest, rows, conditions: conds })
}
