//! Monte Carlo harness: fairness, winner uniformity, equilibrium comparisons,
//! the legitimate-winner oracle with its claim audits, and scaling tables.
//!
//! Trials are keyed by seed and run on the current rayon pool. Results are
//! collected in seed order, so a report does not depend on the pool size.

mod claims;
mod equilibrium;
mod fairness;
mod scaling;
pub mod table;
mod winner;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::sim::{CalibrationConstants, FaultSpec, GoodExecutionFlags, SimConfig, Trace};

pub use claims::{claims_audit, ClaimObservation, ClaimsAudit, ClaimsVerdict, ColorShareCheck};
pub use equilibrium::{run_equilibrium_experiment, run_equilibrium_experiment_with, EquilibriumReport, MemberStats};
pub use fairness::{
    fairness_test, run_fairness_experiment, winner_uniformity_test, ColorStat, ColorVerdict, FairnessReport,
    FairnessVerdict, UniformityVerdict,
};
pub use scaling::{scaling_experiment, ScalingRow, ScalingTable};
pub use winner::{legitimate_winner, LegitimateWinnerRecord};

/// Result of a statistical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough usable trials to decide.
    Indeterminate,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// A trial template: the base configuration plus how each trial's faulty set is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    /// Its seed is ignored; each trial sets its own.
    pub base: SimConfig,
    /// `FaultSpec::None` keeps `base.faulty`.
    #[serde(default)]
    pub faults: FaultSpec,
    #[serde(default)]
    pub calibration: CalibrationConstants,
}

impl Experiment {
    pub fn new(base: SimConfig) -> Self {
        Experiment { base, faults: FaultSpec::None, calibration: CalibrationConstants::default() }
    }

    pub fn with_faults(mut self, faults: FaultSpec) -> Self {
        self.faults = faults;
        self
    }

    pub fn with_calibration(mut self, calibration: CalibrationConstants) -> Self {
        self.calibration = calibration;
        self
    }

    pub fn trial_config(&self, seed: u64) -> Result<SimConfig, ConfigError> {
        let mut cfg = self.base.clone().with_seed(seed);
        if self.faults != FaultSpec::None {
            cfg.faulty = self.faults.resolve(&cfg.colors, seed)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Whether the coalition in `trace` actually deviates (a non-empty coalition
/// running anything but the honest strategy).
pub fn is_deviating(trace: &Trace) -> bool {
    trace.config.coalition.as_ref().is_some_and(|c| !c.members.is_empty() && c.strategy.name != "honest")
}

/// The good-execution test that applies to `trace`: the coalition events plus
/// `k` uniqueness when a coalition deviates, all six events otherwise.
pub fn is_good(trace: &Trace, flags: &GoodExecutionFlags) -> bool {
    if is_deviating(trace) {
        flags.good_under_deviation()
    } else {
        flags.all()
    }
}

/// Binomial tolerance `sigma_mult * sqrt(p (1 - p) / n)`.
pub(crate) fn binomial_tolerance(p: f64, n: u64, sigma_mult: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    sigma_mult * (p * (1.0 - p) / n as f64).sqrt()
}
