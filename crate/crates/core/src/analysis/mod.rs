//! Closed forms, ideal-world oracles and Monte Carlo estimators.

mod closed_form;
mod detection;
mod fairness;
mod ideal;
mod montecarlo;
mod nash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{
    stream_rng, streams, MillionaireInputs, ProtocolError, ProtocolSetup, QepVariant, ScheduleSource,
    XorInputs,
};

pub use closed_form::*;
pub use detection::{estimate_detection, detection_horizon};
pub use fairness::{fairness_audit, mp_audit_grid, xor_audit_cases, AuditCase, AuditResult};
pub use ideal::{ideal_world_mp, ideal_world_xor, mp_subcase, AbortPosition};
pub use montecarlo::{count_trials, splitmix64, trial_seed, tv_distance, OutcomeDistribution, Proportion};
pub use nash::{
    correctness_counts, default_catalog, estimate_utility, nash_check, Condition, NashReport, NashRow,
    UtilityEstimate, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("utilities violate the preference ordering: {0} does not hold")]
    PreferenceViolation(&'static str),
    #[error("gamma must lie strictly between 0 and 1, got {0}")]
    GammaOutOfRange(String),
    #[error("no valid gamma: the bound's numerator is negative")]
    NoValidGamma,
    #[error("{0}")]
    OutOfRange(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Inputs of an embedded-XOR experiment: fixed or redrawn uniformly per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum XorInputChoice {
    Fixed(XorInputs),
    Uniform,
}

/// A protocol together with its inputs, from which each trial's concrete
/// setup is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scenario {
    Qmp { inputs: MillionaireInputs },
    Qrmp { i: u32, j: u32, gamma: f64 },
    Qep { inputs: XorInputChoice, variant: QepVariant, gamma: f64 },
}

impl Scenario {
    /// Concrete setup for the trial running with `seed`.
    pub fn setup(&self, seed: u64) -> ProtocolSetup {
        match *self {
            Scenario::Qmp { inputs } => ProtocolSetup::Qmp { inputs },
            Scenario::Qrmp { i, j, gamma } => ProtocolSetup::Qrmp { i, j, schedule: ScheduleSource::Sampled { gamma } },
            Scenario::Qep { inputs, variant, gamma } => {
                let inputs = match inputs {
                    XorInputChoice::Fixed(x) => x,
                    XorInputChoice::Uniform => XorInputs::random(&mut stream_rng(seed, streams::EXPERIMENT)),
                };
                ProtocolSetup::Qep { inputs, variant, schedule: ScheduleSource::Sampled { gamma } }
            }
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Scenario::Qmp { .. } => None,
            Scenario::Qrmp { gamma, .. } | Scenario::Qep { gamma, .. } => Some(*gamma),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Qmp { .. } => "QMP",
            Scenario::Qrmp { .. } => "QRMP",
            Scenario::Qep { variant: QepVariant::Qep, .. } => "QEP",
            Scenario::Qep { variant: QepVariant::Qep2, .. } => "QEP2",
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        match self {
            Scenario::Qmp { inputs } => inputs.validate()?,
            Scenario::Qrmp { i, j, gamma } => {
                crate::protocol::check_gamma(*gamma)?;
                if *i == 0 || *j == 0 {
                    return Err(AnalysisError::OutOfRange("secrets are numbered from 1".into()));
                }
            }
            Scenario::Qep { inputs, gamma, .. } => {
                crate::protocol::check_gamma(*gamma)?;
                if let XorInputChoice::Fixed(x) = inputs {
                    x.validate()?;
                }
            }
        }
        Ok(())
    }
}
