//! Seeded parallel trial execution and empirical outcome distributions.
//!
//! Trial `t` of an experiment with base seed `s` always runs with seed
//! `splitmix64(s + t)`, and workers only merge integer counts, so results do
//! not depend on how trials are spread over threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::protocol::WorldOutcome;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base.wrapping_add(trial))
}

/// Runs `trials` trials and counts the keys they produce.
pub fn count_trials<K, E, F>(trials: u64, base_seed: u64, run: F) -> Result<BTreeMap<K, u64>, E>
where
    K: Ord + Send,
    E: Send,
    F: Fn(u64) -> Result<K, E> + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|t| run(trial_seed(base_seed, t)))
        .try_fold(BTreeMap::new, |mut acc, key| {
            *acc.entry(key?).or_insert(0) += 1;
            Ok(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })
}

/// Binomial estimate and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub total: u64,
    pub estimate: f64,
    pub stderr: f64,
}

impl Proportion {
    pub fn new(hits: u64, total: u64) -> Self {
        let p = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        let stderr = if total == 0 { 0.0 } else { (p * (1.0 - p) / total as f64).sqrt() };
        Self { hits, total, estimate: p, stderr }
    }
}

/// Empirical distribution of world outcomes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub counts: BTreeMap<WorldOutcome, u64>,
    pub trials: u64,
}

impl OutcomeDistribution {
    pub fn from_counts(counts: BTreeMap<WorldOutcome, u64>) -> Self {
        let trials = counts.values().sum();
        Self { counts, trials }
    }

    pub fn probability(&self, outcome: &WorldOutcome) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.counts.get(outcome).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn support(&self) -> impl Iterator<Item = (&WorldOutcome, f64)> + '_ {
        self.counts.iter().map(|(o, &c)| (o, c as f64 / self.trials as f64))
    }
}

/// Half the L1 distance between two distributions.
pub fn tv_distance(a: &OutcomeDistribution, b: &OutcomeDistribution) -> f64 {
    let keys: std::collections::BTreeSet<&WorldOutcome> = a.counts.keys().chain(b.counts.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.probability(k) - b.probability(k)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::PartyOutcome;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn counts_ignore_thread_count() {
        let run = || {
            count_trials::<u64, (), _>(10_000, 7, |s| Ok(s % 5)).unwrap()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
        assert_eq!(one.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn errors_propagate() {
        let r = count_trials::<u64, String, _>(100, 0, |s| if s % 7 == 0 { Err("bad".into()) } else { Ok(1) });
        assert!(r.is_err() || r.unwrap().values().sum::<u64>() == 100);
    }

    #[test]
    fn tv_of_known_distributions() {
        let v = |a| WorldOutcome::values(a, a);
        let a = OutcomeDistribution::from_counts([(v(0), 50), (v(1), 50)].into());
        let b = OutcomeDistribution::from_counts([(v(0), 100)].into());
        assert!((tv_distance(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(tv_distance(&a, &a), 0.0);
        let c = OutcomeDistribution::from_counts(
            [(WorldOutcome::new(PartyOutcome::Null, PartyOutcome::Null), 10)].into(),
        );
        assert!((tv_distance(&b, &c) - 1.0).abs() < 1e-15);
        let total: f64 = a.support().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn proportion_stderr() {
        let p = Proportion::new(25, 100);
        assert_eq!(p.estimate, 0.25);
        assert!((p.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(Proportion::new(0, 0).estimate, 0.0);
    }
}
