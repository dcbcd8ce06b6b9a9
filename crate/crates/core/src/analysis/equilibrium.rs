use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::claims::{ClaimObservation, ClaimsAudit};
use super::Experiment;
use crate::adversary::{CoalitionSpec, StrategyRegistry, StrategySpec};
use crate::error::ConfigError;
use crate::protocol::{utility, AgentId, Color};
use crate::sim::{classify_good_execution, init_simulation_with, SimConfig, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberStats {
    pub member: AgentId,
    pub color: Color,
    /// Means over the kept pairs.
    pub baseline_mean: f64,
    pub deviation_mean: f64,
    pub difference: f64,
    /// `sigma_mult` pooled standard errors of the two means.
    pub ci_half_width: f64,
    /// Means over all pairs, good or not.
    pub baseline_mean_unconditioned: f64,
    pub deviation_mean_unconditioned: f64,
    /// `deviation_mean <= baseline_mean + ci_half_width`.
    pub no_gain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub experiment: Experiment,
    pub strategy: StrategySpec,
    pub members: BTreeSet<AgentId>,
    pub seed0: u64,
    pub trials: u64,
    /// Pairs where both arms were good.
    pub kept_pairs: u64,
    pub dropped_pairs: u64,
    pub baseline_fail_rate: f64,
    pub deviation_fail_rate: f64,
    pub baseline_good_rate: f64,
    pub deviation_good_rate: f64,
    pub sigma_mult: f64,
    pub member_stats: Vec<MemberStats>,
    /// Some member does not gain. False when no pair was kept.
    pub exists_member_no_gain: bool,
    /// `|C| ln n >= n`: outside the regime the equilibrium result covers.
    pub regime_warning: bool,
    pub baseline_claims: ClaimsAudit,
    pub deviation_claims: ClaimsAudit,
}

struct PairObs {
    good: [bool; 2],
    failed: [bool; 2],
    utilities: [Vec<f64>; 2],
    claims: [ClaimObservation; 2],
}

/// Runs `trials` coupled pairs: the coalition of `exp.base` plays honestly in
/// the baseline arm and plays `strategy` in the deviation arm, at the same seed.
pub fn run_equilibrium_experiment(
    exp: &Experiment,
    strategy: &StrategySpec,
    trials: u64,
    seed0: u64,
    sigma_mult: f64,
) -> Result<EquilibriumReport, ConfigError> {
    run_equilibrium_experiment_with(exp, strategy, trials, seed0, sigma_mult, &StrategyRegistry::default())
}

pub fn run_equilibrium_experiment_with(
    exp: &Experiment,
    strategy: &StrategySpec,
    trials: u64,
    seed0: u64,
    sigma_mult: f64,
    registry: &StrategyRegistry,
) -> Result<EquilibriumReport, ConfigError> {
    let members = exp.base.members();
    if members.is_empty() {
        return Err(ConfigError::invalid("coalition", "an equilibrium experiment needs a non-empty coalition"));
    }
    registry.build(strategy)?;
    let arm = |spec: StrategySpec| {
        let mut e = exp.clone();
        e.base.coalition = Some(CoalitionSpec::new(members.iter().copied(), spec));
        e
    };
    let arms = [arm(StrategySpec::named("honest")), arm(strategy.clone())];
    let chi = exp.base.params.chi;

    let run = |e: &Experiment, seed: u64| -> Result<(Trace, bool, ClaimObservation), ConfigError> {
        let cfg: SimConfig = e.trial_config(seed)?;
        let trace = init_simulation_with(&cfg, registry)?.run();
        let flags = classify_good_execution(&trace, &e.calibration);
        let obs = ClaimObservation::of(&trace, &flags, &members);
        Ok((trace, obs.good, obs))
    };

    let pairs: Vec<PairObs> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = seed0.wrapping_add(i);
            let (tb, gb, ob) = run(&arms[0], seed)?;
            let (td, gd, od) = run(&arms[1], seed)?;
            let utils = |t: &Trace| -> Vec<f64> {
                members.iter().map(|&w| utility(t.outcome, t.config.color_of(w), chi)).collect()
            };
            Ok(PairObs {
                good: [gb, gd],
                failed: [tb.outcome.is_fail(), td.outcome.is_fail()],
                utilities: [utils(&tb), utils(&td)],
                claims: [ob, od],
            })
        })
        .collect::<Result<_, ConfigError>>()?;

    let t = trials.max(1) as f64;
    let rate = |f: &dyn Fn(&PairObs) -> bool| pairs.iter().filter(|p| f(p)).count() as f64 / t;
    let kept: Vec<&PairObs> = pairs.iter().filter(|p| p.good[0] && p.good[1]).collect();
    let kept_pairs = kept.len() as u64;

    let member_stats: Vec<MemberStats> = members
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let (bm, bv) = mean_var(kept.iter().map(|p| p.utilities[0][i]));
            let (dm, dv) = mean_var(kept.iter().map(|p| p.utilities[1][i]));
            let (bu, _) = mean_var(pairs.iter().map(|p| p.utilities[0][i]));
            let (du, _) = mean_var(pairs.iter().map(|p| p.utilities[1][i]));
            let k = kept_pairs.max(1) as f64;
            let ci_half_width = sigma_mult * (bv / k + dv / k).sqrt();
            MemberStats {
                member: w,
                color: exp.base.color_of(w),
                baseline_mean: bm,
                deviation_mean: dm,
                difference: dm - bm,
                ci_half_width,
                baseline_mean_unconditioned: bu,
                deviation_mean_unconditioned: du,
                no_gain: kept_pairs > 0 && dm <= bm + ci_half_width,
            }
        })
        .collect();

    let mut audits = [ClaimsAudit::default(), ClaimsAudit::default()];
    for p in &pairs {
        for (audit, obs) in audits.iter_mut().zip(&p.claims) {
            audit.observe(obs);
        }
    }
    let [baseline_claims, deviation_claims] = audits;

    Ok(EquilibriumReport {
        experiment: exp.clone(),
        strategy: strategy.clone(),
        regime_warning: CoalitionSpec::new(members.iter().copied(), strategy.clone()).regime_warning(exp.base.params.n),
        members,
        seed0,
        trials,
        kept_pairs,
        dropped_pairs: trials - kept_pairs,
        baseline_fail_rate: rate(&|p| p.failed[0]),
        deviation_fail_rate: rate(&|p| p.failed[1]),
        baseline_good_rate: rate(&|p| p.good[0]),
        deviation_good_rate: rate(&|p| p.good[1]),
        sigma_mult,
        exists_member_no_gain: member_stats.iter().any(|m| m.no_gain),
        member_stats,
        baseline_claims,
        deviation_claims,
    })
}

/// Mean and unbiased sample variance; zeros for fewer than two samples.
fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_var_basics() {
        assert_eq!(mean_var([].into_iter()), (0.0, 0.0));
        assert_eq!(mean_var([2.0].into_iter()), (2.0, 0.0));
        let (m, v) = mean_var([1.0, 2.0, 3.0].into_iter());
        assert_eq!(m, 2.0);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
