use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial_tolerance, is_good, Experiment, Verdict};
use crate::error::ConfigError;
use crate::protocol::{AgentId, Color, Outcome};
use crate::sim::{classify_good_execution, run_trial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorStat {
    pub color: Color,
    /// Mean of `N(A, c) / |A|` over the non-failing trials (over all trials if none succeeded).
    pub active_share: f64,
    pub wins: u64,
    /// `wins / successes`.
    pub frequency: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub experiment: Experiment,
    pub seed0: u64,
    pub trials: u64,
    pub successes: u64,
    pub fail_count: u64,
    pub good_executions: u64,
    pub colors: Vec<ColorStat>,
    /// Wins of each agent over the non-failing trials.
    pub agent_wins: BTreeMap<AgentId, u64>,
    /// Sum over non-failing trials of `1 / |A|` for trials where the agent is active.
    pub agent_expected: BTreeMap<AgentId, f64>,
    pub max_rounds: u32,
    pub max_message_bits: u64,
}

impl FairnessReport {
    pub fn fail_rate(&self) -> f64 {
        self.fail_count as f64 / self.trials.max(1) as f64
    }

    pub fn good_rate(&self) -> f64 {
        self.good_executions as f64 / self.trials.max(1) as f64
    }
}

struct TrialSummary {
    outcome: Outcome,
    winner: Option<AgentId>,
    shares: Vec<f64>,
    active: Vec<AgentId>,
    good: bool,
    rounds: u32,
    max_bits: u64,
}

/// Runs `trials` trials at seeds `seed0..seed0 + trials`.
pub fn run_fairness_experiment(exp: &Experiment, trials: u64, seed0: u64) -> Result<FairnessReport, ConfigError> {
    let sigma = exp.base.params.sigma_size as usize;
    let summaries: Vec<TrialSummary> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let cfg = exp.trial_config(seed0.wrapping_add(i))?;
            let trace = run_trial(&cfg)?;
            let flags = classify_good_execution(&trace, &exp.calibration);
            let active: Vec<AgentId> = trace.active().collect();
            let mut shares = vec![0.0; sigma];
            for u in &active {
                shares[cfg.color_of(*u).0 as usize - 1] += 1.0 / active.len() as f64;
            }
            Ok(TrialSummary {
                outcome: trace.outcome,
                winner: trace.winner,
                shares,
                active,
                good: is_good(&trace, &flags),
                rounds: trace.stats.rounds_elapsed,
                max_bits: trace.stats.max_message_bits,
            })
        })
        .collect::<Result<_, ConfigError>>()?;

    let mut wins = vec![0u64; sigma];
    let mut share_ok = vec![0.0; sigma];
    let mut share_all = vec![0.0; sigma];
    let mut agent_wins: BTreeMap<AgentId, u64> = exp.base.params.agents().map(|a| (a, 0)).collect();
    let mut agent_expected: BTreeMap<AgentId, f64> = exp.base.params.agents().map(|a| (a, 0.0)).collect();
    let (mut successes, mut fail_count, mut good_executions, mut max_rounds, mut max_message_bits) = (0, 0, 0, 0, 0);
    for s in &summaries {
        for (acc, x) in share_all.iter_mut().zip(&s.shares) {
            *acc += x;
        }
        good_executions += s.good as u64;
        max_rounds = max_rounds.max(s.rounds);
        max_message_bits = max_message_bits.max(s.max_bits);
        match s.outcome {
            Outcome::Fail => fail_count += 1,
            Outcome::Color(c) => {
                successes += 1;
                wins[c.0 as usize - 1] += 1;
                for (acc, x) in share_ok.iter_mut().zip(&s.shares) {
                    *acc += x;
                }
                if let Some(w) = s.winner {
                    *agent_wins.get_mut(&w).expect("winner in range") += 1;
                }
                for u in &s.active {
                    *agent_expected.get_mut(u).expect("agent in range") += 1.0 / s.active.len() as f64;
                }
            }
        }
    }

    let colors = (0..sigma)
        .map(|i| {
            let p = if successes > 0 { share_ok[i] / successes as f64 } else { share_all[i] / trials.max(1) as f64 };
            let frequency = if successes > 0 { wins[i] as f64 / successes as f64 } else { 0.0 };
            let sd = binomial_tolerance(p, successes, 1.0);
            let z_score = if sd > 0.0 && sd.is_finite() { (frequency - p) / sd } else { 0.0 };
            ColorStat { color: Color(i as u32 + 1), active_share: p, wins: wins[i], frequency, z_score }
        })
        .collect();

    Ok(FairnessReport {
        experiment: exp.clone(),
        seed0,
        trials,
        successes,
        fail_count,
        good_executions,
        colors,
        agent_wins,
        agent_expected,
        max_rounds,
        max_message_bits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorVerdict {
    pub color: Color,
    pub frequency: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessVerdict {
    pub verdict: Verdict,
    pub colors: Vec<ColorVerdict>,
    pub fail_rate: f64,
    pub max_fail_rate: f64,
}

/// Each color's frequency within `sigma_mult` binomial standard errors of its
/// active share, and the failure rate at most `max_fail_rate`.
pub fn fairness_test(report: &FairnessReport, sigma_mult: f64, max_fail_rate: f64) -> FairnessVerdict {
    let fail_rate = report.fail_rate();
    if report.successes == 0 {
        return FairnessVerdict { verdict: Verdict::Indeterminate, colors: Vec::new(), fail_rate, max_fail_rate };
    }
    let colors: Vec<ColorVerdict> = report
        .colors
        .iter()
        .map(|c| {
            let tolerance = binomial_tolerance(c.active_share, report.successes, sigma_mult);
            let pass = (c.frequency - c.active_share).abs() <= tolerance + 1e-12;
            ColorVerdict { color: c.color, frequency: c.frequency, expected: c.active_share, tolerance, pass }
        })
        .collect();
    let ok = colors.iter().all(|c| c.pass) && fail_rate <= max_fail_rate;
    FairnessVerdict { verdict: Verdict::from_bool(ok), colors, fail_rate, max_fail_rate }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityVerdict {
    pub verdict: Verdict,
    /// Agents outside their band, with frequency and expected frequency.
    pub outliers: Vec<(AgentId, f64, f64)>,
    pub max_abs_z: f64,
}

/// Every agent's win frequency within `sigma_mult` binomial standard errors of
/// its expected share `1 / |A|` (zero for an agent that is never active).
pub fn winner_uniformity_test(report: &FairnessReport, sigma_mult: f64) -> UniformityVerdict {
    let t = report.successes;
    if t == 0 {
        return UniformityVerdict { verdict: Verdict::Pass, outliers: Vec::new(), max_abs_z: 0.0 };
    }
    let mut outliers = Vec::new();
    let mut max_abs_z: f64 = 0.0;
    for (id, &wins) in &report.agent_wins {
        let p = report.agent_expected[id] / t as f64;
        let freq = wins as f64 / t as f64;
        let sd = binomial_tolerance(p, t, 1.0);
        if sd > 0.0 {
            max_abs_z = max_abs_z.max((freq - p).abs() / sd);
        }
        if (freq - p).abs() > sigma_mult * sd + 1e-12 {
            outliers.push((*id, freq, p));
        }
    }
    UniformityVerdict { verdict: Verdict::from_bool(outliers.is_empty()), outliers, max_abs_z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Params;
    use crate::sim::{parse_color_shorthand, SimConfig};

    fn report(freqs: &[(f64, f64)], successes: u64) -> FairnessReport {
        let p = Params::derive(2, 1.0, 1.0, freqs.len() as u32).unwrap();
        let exp = Experiment::new(SimConfig::new(p, parse_color_shorthand("1,2").unwrap()));
        FairnessReport {
            experiment: exp,
            seed0: 0,
            trials: successes,
            successes,
            fail_count: 0,
            good_executions: successes,
            colors: freqs
                .iter()
                .enumerate()
                .map(|(i, &(share, f))| ColorStat {
                    color: Color(i as u32 + 1),
                    active_share: share,
                    wins: (f * successes as f64) as u64,
                    frequency: f,
                    z_score: 0.0,
                })
                .collect(),
            agent_wins: BTreeMap::new(),
            agent_expected: BTreeMap::new(),
            max_rounds: 0,
            max_message_bits: 0,
        }
    }

    #[test]
    fn exact_share_passes() {
        let r = report(&[(0.5, 0.5), (0.5, 0.5)], 1000);
        assert_eq!(fairness_test(&r, 4.0, 0.01).verdict, Verdict::Pass);
    }

    #[test]
    fn ten_sigma_fails() {
        let sd = (0.25f64 / 1000.0).sqrt();
        let r = report(&[(0.5, 0.5 + 10.0 * sd), (0.5, 0.5 - 10.0 * sd)], 1000);
        assert_eq!(fairness_test(&r, 4.0, 0.01).verdict, Verdict::Fail);
    }

    #[test]
    fn no_successes_is_indeterminate() {
        let mut r = report(&[(0.5, 0.0), (0.5, 0.0)], 0);
        r.trials = 10;
        r.fail_count = 10;
        assert_eq!(fairness_test(&r, 4.0, 0.01).verdict, Verdict::Indeterminate);
    }

    #[test]
    fn one_agent_always_winning_is_not_uniform() {
        let mut r = report(&[(0.5, 1.0), (0.5, 0.0)], 1000);
        r.agent_wins = [(AgentId(1), 1000), (AgentId(2), 0)].into();
        r.agent_expected = [(AgentId(1), 500.0), (AgentId(2), 500.0)].into();
        let v = winner_uniformity_test(&r, 4.0);
        assert_eq!(v.verdict, Verdict::Fail);
        assert_eq!(v.outliers.len(), 2);
    }
}
