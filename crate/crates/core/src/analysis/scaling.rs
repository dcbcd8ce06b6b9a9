use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_good, Experiment};
use crate::error::ConfigError;
use crate::protocol::{Color, Params};
use crate::sim::{classify_good_execution, run_trial, CalibrationConstants, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u32,
    pub q: u32,
    pub rounds_elapsed: u32,
    /// Largest message over all trials.
    pub max_message_bits: u64,
    /// Largest tally any agent ended with.
    pub max_tally: usize,
    pub good_rate: f64,
    pub fail_rate: f64,
    /// `ln n * log2 n`, the reference growth for message size.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub gamma: f64,
    pub trials: u64,
    pub seed0: u64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    /// `max_message_bits / reference` at each `n` against the first row's
    /// ratio times `slack`.
    pub fn message_growth_ok(&self, slack: f64) -> bool {
        let Some(first) = self.rows.first() else { return true };
        let c = first.max_message_bits as f64 / first.reference;
        self.rows.iter().all(|r| r.max_message_bits as f64 <= slack * c * r.reference)
    }

    pub fn rounds_exact(&self) -> bool {
        self.rows.iter().all(|r| r.rounds_elapsed == 4 * r.q)
    }
}

/// Fault-free runs at each `n` with colors split in half, sequential seeds from `seed0`.
pub fn scaling_experiment(
    n_values: &[u32],
    gamma: f64,
    trials: u64,
    seed0: u64,
    calib: &CalibrationConstants,
) -> Result<ScalingTable, ConfigError> {
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let params = Params::derive(n, gamma, 1.0, 2)?;
        let colors = (1..=n).map(|i| Color(if i <= n / 2 { 1 } else { 2 })).collect();
        let exp = Experiment::new(SimConfig::new(params, colors)).with_calibration(*calib);
        let per_trial: Vec<(u32, u64, usize, bool, bool)> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let trace = run_trial(&exp.trial_config(seed0.wrapping_add(i))?)?;
                let flags = classify_good_execution(&trace, calib);
                let max_tally = trace.agents.iter().map(|a| a.tally.len()).max().unwrap_or(0);
                Ok((
                    trace.stats.rounds_elapsed,
                    trace.stats.max_message_bits,
                    max_tally,
                    is_good(&trace, &flags),
                    trace.outcome.is_fail(),
                ))
            })
            .collect::<Result<_, ConfigError>>()?;
        let t = trials.max(1) as f64;
        let ln = (n as f64).ln();
        rows.push(ScalingRow {
            n,
            q: params.q,
            rounds_elapsed: per_trial.iter().map(|r| r.0).max().unwrap_or(params.total_rounds()),
            max_message_bits: per_trial.iter().map(|r| r.1).max().unwrap_or(0),
            max_tally: per_trial.iter().map(|r| r.2).max().unwrap_or(0),
            good_rate: per_trial.iter().filter(|r| r.3).count() as f64 / t,
            fail_rate: per_trial.iter().filter(|r| r.4).count() as f64 / t,
            reference: ln * (n as f64).log2(),
        });
    }
    Ok(ScalingTable { gamma, trials, seed0, rows })
}
