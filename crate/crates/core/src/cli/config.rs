//! Config documents (TOML) and their resolution into run configurations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::adversary::{CoalitionSpec, StrategyParams, StrategyRegistry, StrategySpec};
use crate::error::ConfigError;
use crate::protocol::{AgentId, Color, Params};
use crate::sim::{parse_color_shorthand, spread_coalition, CalibrationConstants, FaultSpec, SimConfig};

pub const DEFAULT_GAMMA: f64 = 4.0;
pub const DEFAULT_CHI: f64 = 1.0;
pub const DEFAULT_SIGMA_MULT: f64 = 4.0;
pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_MAX_FAIL_RATE: f64 = 0.01;
pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_N: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColorsField {
    Shorthand(String),
    List(Vec<u32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportersField {
    pub color: u32,
    pub count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalitionField {
    pub members: Option<Vec<u32>>,
    /// Members spread evenly over the active agents.
    pub size: Option<usize>,
    pub strategy: Option<String>,
    #[serde(default)]
    pub params: StrategyParams,
}

/// A config document. Every key is optional; flags override what is set here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub n: Option<u32>,
    pub gamma: Option<f64>,
    pub chi: Option<f64>,
    pub sigma_size: Option<u32>,
    pub colors: Option<ColorsField>,
    pub alpha: Option<f64>,
    pub faulty: Option<Vec<u32>>,
    pub random_faults: Option<u32>,
    pub faulty_supporters: Option<SupportersField>,
    pub coalition: Option<CoalitionField>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub sigma_mult: Option<f64>,
    pub max_fail_rate: Option<f64>,
    pub calibration: Option<CalibrationConstants>,
    pub n_values: Option<Vec<u32>>,
}

impl ConfigDoc {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::invalid("config", e.message().to_string()))
    }

    /// Keys set in `over` win.
    pub fn overlay(self, over: ConfigDoc) -> ConfigDoc {
        let coalition = match (self.coalition, over.coalition) {
            (Some(a), Some(b)) => Some(if b.members.is_some() || b.size.is_some() {
                CoalitionField {
                    members: b.members,
                    size: b.size,
                    strategy: b.strategy.or(a.strategy),
                    params: if b.params.is_empty() { a.params } else { b.params },
                }
            } else {
                CoalitionField {
                    members: a.members,
                    size: a.size,
                    strategy: b.strategy.or(a.strategy),
                    params: if b.params.is_empty() { a.params } else { b.params },
                }
            }),
            (a, b) => b.or(a),
        };
        let any_fault = over.faulty.is_some() || over.random_faults.is_some() || over.faulty_supporters.is_some();
        let (faulty, random_faults, faulty_supporters) = if any_fault {
            (over.faulty, over.random_faults, over.faulty_supporters)
        } else {
            (self.faulty, self.random_faults, self.faulty_supporters)
        };
        ConfigDoc {
            n: over.n.or(self.n),
            gamma: over.gamma.or(self.gamma),
            chi: over.chi.or(self.chi),
            sigma_size: over.sigma_size.or(self.sigma_size),
            colors: over.colors.or(self.colors),
            alpha: over.alpha.or(self.alpha),
            faulty,
            random_faults,
            faulty_supporters,
            coalition,
            seed: over.seed.or(self.seed),
            trials: over.trials.or(self.trials),
            sigma_mult: over.sigma_mult.or(self.sigma_mult),
            max_fail_rate: over.max_fail_rate.or(self.max_fail_rate),
            calibration: over.calibration.or(self.calibration),
            n_values: over.n_values.or(self.n_values),
        }
    }
}

/// Settings of an experiment that are not part of a single trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub faults: FaultSpec,
    pub seed: u64,
    pub trials: u64,
    pub sigma_mult: f64,
    pub max_fail_rate: f64,
    pub calibration: CalibrationConstants,
    pub n_values: Vec<u32>,
}

/// Applies defaults and validates. `sim.faulty` is resolved at `seed`.
pub fn parse_config(doc: &ConfigDoc) -> Result<(SimConfig, ExperimentConfig), ConfigError> {
    let n = doc.n.unwrap_or(DEFAULT_N);
    let colors: Vec<Color> = match &doc.colors {
        None => (1..=n).map(|i| Color(if i <= n.div_ceil(2) { 1 } else { 2 })).collect(),
        Some(ColorsField::Shorthand(s)) => parse_color_shorthand(s)?,
        Some(ColorsField::List(v)) => {
            if v.contains(&0) {
                return Err(ConfigError::invalid("colors", "colors start at 1"));
            }
            v.iter().map(|&c| Color(c)).collect()
        }
    };
    if colors.len() != n as usize {
        return Err(ConfigError::ColorCount { got: colors.len(), n });
    }
    let sigma_size = doc.sigma_size.unwrap_or_else(|| colors.iter().map(|c| c.0).max().unwrap_or(1));
    let params = Params::derive(n, doc.gamma.unwrap_or(DEFAULT_GAMMA), doc.chi.unwrap_or(DEFAULT_CHI), sigma_size)?;

    let fault_sources =
        doc.faulty.is_some() as u8 + doc.random_faults.is_some() as u8 + doc.faulty_supporters.is_some() as u8;
    if fault_sources > 1 {
        return Err(ConfigError::invalid("faulty", "set at most one of faulty, random_faults, faulty_supporters"));
    }
    let faults = if let Some(ids) = &doc.faulty {
        FaultSpec::Explicit(ids.iter().map(|&i| AgentId(i)).collect())
    } else if let Some(count) = doc.random_faults {
        FaultSpec::Random { count }
    } else if let Some(s) = doc.faulty_supporters {
        FaultSpec::ColorSupporters { color: Color(s.color), count: s.count }
    } else {
        FaultSpec::None
    };
    let seed = doc.seed.unwrap_or(0);
    let faulty = faults.resolve(&colors, seed)?;

    let coalition = match &doc.coalition {
        None => None,
        Some(_) if matches!(faults, FaultSpec::Random { .. }) => {
            return Err(ConfigError::invalid("coalition", "cannot be combined with random_faults"));
        }
        Some(c) => {
            let members: BTreeSet<AgentId> = match (&c.members, c.size) {
                (Some(_), Some(_)) => return Err(ConfigError::invalid("coalition", "set members or size, not both")),
                (Some(ids), None) => ids.iter().map(|&i| AgentId(i)).collect(),
                (None, Some(size)) => spread_coalition(size, n, &faulty)?,
                (None, None) => return Err(ConfigError::invalid("coalition", "needs members or size")),
            };
            let spec = StrategySpec {
                name: c.strategy.clone().unwrap_or_else(|| "honest".to_string()),
                params: c.params.clone(),
            };
            StrategyRegistry::default().build(&spec)?;
            Some(CoalitionSpec { members, strategy: spec })
        }
    };

    let alpha = doc.alpha.unwrap_or(DEFAULT_ALPHA);
    let sim = SimConfig { params, colors, faulty, alpha, coalition, seed };
    sim.validate()?;

    let sigma_mult = doc.sigma_mult.unwrap_or(DEFAULT_SIGMA_MULT);
    if sigma_mult.is_nan() || sigma_mult <= 0.0 {
        return Err(ConfigError::invalid("sigma_mult", format!("must be positive, got {sigma_mult}")));
    }
    let max_fail_rate = doc.max_fail_rate.unwrap_or(DEFAULT_MAX_FAIL_RATE);
    if !(0.0..=1.0).contains(&max_fail_rate) {
        return Err(ConfigError::invalid("max_fail_rate", format!("must lie in [0, 1], got {max_fail_rate}")));
    }
    let trials = doc.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(ConfigError::invalid("trials", "must be at least 1"));
    }
    let calibration = doc.calibration.unwrap_or_default();
    if !(calibration.beta1 >= 0.0 && calibration.beta1 <= calibration.beta2) {
        return Err(ConfigError::invalid("calibration", "need 0 <= beta1 <= beta2"));
    }
    let n_values = doc.n_values.clone().unwrap_or_else(|| vec![16, 64, 256]);
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(ConfigError::invalid("n_values", "need a non-empty list of positive sizes"));
    }
    Ok((sim, ExperimentConfig { faults, seed, trials, sigma_mult, max_fail_rate, calibration, n_values }))
}
