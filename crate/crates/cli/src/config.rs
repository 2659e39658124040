//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use qfair::adversary::AdversaryStrategy;
use qfair::analysis::{Scenario, Utilities, XorInputChoice};
use qfair::protocol::{MillionaireInputs, Party, QepVariant, XorInputs};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_MAX_TRANSCRIPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "QMP")]
    Qmp,
    #[serde(rename = "QRMP")]
    Qrmp,
    #[serde(rename = "QEP")]
    Qep,
    #[serde(rename = "QEP2")]
    Qep2,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Qmp => "QMP",
            ProtocolKind::Qrmp => "QRMP",
            ProtocolKind::Qep => "QEP",
            ProtocolKind::Qep2 => "QEP2",
        }
    }

    pub fn is_rational(self) -> bool {
        self != ProtocolKind::Qmp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Structured,
}

/// Millionaire secrets `i`, `j` and round count `m`, or XOR inputs `x`, `y`.
/// XOR inputs left out are drawn uniformly per trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategiesConfig {
    #[serde(default)]
    pub p1: AdversaryStrategy,
    #[serde(default)]
    pub p2: AdversaryStrategy,
}

impl StrategiesConfig {
    pub fn pair(&self) -> [AdversaryStrategy; 2] {
        [self.p1, self.p2]
    }
}

/// Per-party utilities; `p2` defaults to `p1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitiesConfig {
    pub p1: Utilities<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<Utilities<f64>>,
}

impl UtilitiesConfig {
    pub fn pair(&self) -> [Utilities<f64>; 2] {
        [self.p1, self.p2.unwrap_or(self.p1)]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputsConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NashConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Vec<AdversaryStrategy>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default = "default_max_transcripts")]
    pub max_transcripts: usize,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self { dir: None, format: default_format(), max_transcripts: DEFAULT_MAX_TRANSCRIPTS }
    }
}

fn default_format() -> Format {
    Format::Csv
}

fn default_max_transcripts() -> usize {
    DEFAULT_MAX_TRANSCRIPTS
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    #[serde(default)]
    pub inputs: InputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub strategies: StrategiesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<UtilitiesConfig>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub nash: NashConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if let Some(out) = &o.out {
            self.outputs.dir = Some(out.clone());
        }
        if let Some(format) = o.format {
            self.outputs.format = format;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("config field `trials`: must be at least 1");
        }
        let rational = self.protocol.is_rational();
        match (rational, self.gamma) {
            (true, None) if self.sweep.gamma.is_empty() => {
                bail!("config field `gamma`: required for {}", self.protocol.name())
            }
            (false, Some(_)) => bail!("config field `gamma`: not used by QMP"),
            (false, None) if !self.sweep.gamma.is_empty() => bail!("config field `sweep.gamma`: not used by QMP"),
            _ => {}
        }
        for g in self.gammas() {
            if let Some(g) = g {
                if !(g > 0.0 && g < 1.0) {
                    bail!("config field `gamma`: must lie strictly between 0 and 1, got {g}");
                }
            }
        }
        if !self.strategies.p1.is_honest() && !self.strategies.p2.is_honest() {
            bail!("config field `strategies`: at most one party may deviate");
        }
        for (name, s) in [("strategies.p1", self.strategies.p1), ("strategies.p2", self.strategies.p2)] {
            s.validate().map_err(|e| anyhow!("config field `{name}`: {e}"))?;
        }
        if let Some(u) = &self.utilities {
            for (name, u) in [("utilities.p1", u.pair()[0]), ("utilities.p2", u.pair()[1])] {
                u.check_r1().map_err(|e| anyhow!("config field `{name}`: {e}"))?;
            }
        }
        self.scenarios()?;
        Ok(())
    }

    fn gammas(&self) -> Vec<Option<f64>> {
        if self.sweep.gamma.is_empty() {
            vec![self.gamma]
        } else {
            self.sweep.gamma.iter().copied().map(Some).collect()
        }
    }

    fn input_points(&self) -> Vec<InputsConfig> {
        if self.sweep.inputs.is_empty() {
            vec![self.inputs]
        } else {
            self.sweep.inputs.clone()
        }
    }

    /// Every parameter point: each input set crossed with each γ.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let mut out = Vec::new();
        for inputs in self.input_points() {
            for gamma in self.gammas() {
                out.push(self.scenario(&inputs, gamma)?);
            }
        }
        Ok(out)
    }

    fn scenario(&self, inputs: &InputsConfig, gamma: Option<f64>) -> Result<Scenario> {
        let need = |v: Option<u32>, field: &str| {
            v.ok_or_else(|| anyhow!("config field `inputs.{field}`: required for {}", self.protocol.name()))
        };
        let unused = |present: bool, field: &str| -> Result<()> {
            if present {
                bail!("config field `inputs.{field}`: not used by {}", self.protocol.name());
            }
            Ok(())
        };
        let scenario = match self.protocol {
            ProtocolKind::Qmp => {
                unused(inputs.x.is_some(), "x")?;
                unused(inputs.y.is_some(), "y")?;
                let (i, j, m) = (need(inputs.i, "i")?, need(inputs.j, "j")?, need(inputs.m, "m")?);
                let inputs = MillionaireInputs::new(i, j, m).map_err(|e| anyhow!("config field `inputs`: {e}"))?;
                Scenario::Qmp { inputs }
            }
            ProtocolKind::Qrmp => {
                unused(inputs.x.is_some(), "x")?;
                unused(inputs.y.is_some(), "y")?;
                unused(inputs.m.is_some(), "m")?;
                let (i, j) = (need(inputs.i, "i")?, need(inputs.j, "j")?);
                if i == 0 || j == 0 {
                    bail!("config field `inputs`: secrets are numbered from 1");
                }
                Scenario::Qrmp { i, j, gamma: gamma.expect("checked") }
            }
            ProtocolKind::Qep | ProtocolKind::Qep2 => {
                unused(inputs.i.is_some(), "i")?;
                unused(inputs.j.is_some(), "j")?;
                unused(inputs.m.is_some(), "m")?;
                let choice = match (inputs.x, inputs.y) {
                    (Some(x), Some(y)) => XorInputChoice::Fixed(
                        XorInputs::new(x, y).map_err(|e| anyhow!("config field `inputs`: {e}"))?,
                    ),
                    (None, None) => XorInputChoice::Uniform,
                    (Some(_), None) => bail!("config field `inputs.y`: set both x and y, or neither"),
                    (None, Some(_)) => bail!("config field `inputs.x`: set both x and y, or neither"),
                };
                let variant = if self.protocol == ProtocolKind::Qep { QepVariant::Qep } else { QepVariant::Qep2 };
                Scenario::Qep { inputs: choice, variant, gamma: gamma.expect("checked") }
            }
        };
        Ok(scenario)
    }

    /// The single deviating party and its strategy, if any.
    pub fn deviant(&self) -> Option<(Party, AdversaryStrategy)> {
        Party::BOTH
            .into_iter()
            .map(|p| (p, self.strategies.pair()[p.index()]))
            .find(|(_, s)| !s.is_honest())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn defaults() {
        let cfg = parse("protocol = \"QMP\"\ninputs = { i = 2, j = 3, m = 4 }").unwrap();
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.outputs.max_transcripts, DEFAULT_MAX_TRANSCRIPTS);
        assert!(cfg.strategies.p1.is_honest());
    }

    #[test]
    fn missing_gamma_is_named() {
        let err = parse("protocol = \"QRMP\"\ninputs = { i = 2, j = 3 }").unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn r1_violation_is_named() {
        let err = parse(
            "protocol = \"QEP2\"\ngamma = 0.2\n[utilities]\np1 = { tn = 0.5, tt = 0.8, nn = 0.3, nt = 0.0 }",
        )
        .unwrap_err();
        assert!(err.to_string().contains("U^TN > U^TT"), "{err}");
    }

    #[test]
    fn strategies_parse() {
        let cfg = parse(
            "protocol = \"QEP\"\ngamma = 0.3\n[strategies]\np2 = { kind = \"forge_arbitrary_qubit\", round = \"uniform\", spec = \"haar\" }",
        )
        .unwrap();
        assert!(cfg.strategies.p2.is_forging());
        assert_eq!(cfg.deviant().unwrap().0, Party::P2);
    }

    #[test]
    fn sweep_expands() {
        let cfg = parse("protocol = \"QRMP\"\ninputs = { i = 1, j = 2 }\n[sweep]\ngamma = [0.1, 0.25, 0.5]").unwrap();
        assert_eq!(cfg.scenarios().unwrap().len(), 3);
    }

    #[test]
    fn half_xor_inputs_rejected() {
        let err = parse("protocol = \"QEP\"\ngamma = 0.3\ninputs = { x = 1 }").unwrap_err();
        assert!(err.to_string().contains("inputs.y"), "{err}");
    }

    #[test]
    fn zero_trials_rejected() {
        let err = parse("protocol = \"QMP\"\ntrials = 0\ninputs = { i = 1, j = 1, m = 1 }").unwrap_err();
        assert!(err.to_string().contains("trials"));
    }
}
