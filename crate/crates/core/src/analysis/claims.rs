use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::winner::{legitimate_winner, LegitimateWinnerRecord};
use super::{binomial_tolerance, is_good, Verdict};
use crate::protocol::{AgentId, Color};
use crate::sim::{classify_good_execution, CalibrationConstants, GoodExecutionFlags, Trace};

/// What one trace contributes to the claim audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimObservation {
    pub good: bool,
    pub failed: bool,
    pub record: LegitimateWinnerRecord,
    pub winner_color: Option<Color>,
    /// `N(A \ C, c) / |A \ C|` indexed by `color - 1`.
    pub honest_shares: Vec<f64>,
    /// `|C ∩ A| / |A|`.
    pub coalition_share: f64,
}

impl ClaimObservation {
    pub fn of(trace: &Trace, flags: &GoodExecutionFlags, coalition: &BTreeSet<AgentId>) -> Self {
        let sigma = trace.params().sigma_size as usize;
        let active: Vec<AgentId> = trace.active().collect();
        let honest: Vec<AgentId> = active.iter().copied().filter(|u| !coalition.contains(u)).collect();
        let mut honest_shares = vec![0.0; sigma];
        for u in &honest {
            honest_shares[trace.agent(*u).color.0 as usize - 1] += 1.0 / honest.len() as f64;
        }
        let members = active.len() - honest.len();
        ClaimObservation {
            good: is_good(trace, flags),
            failed: trace.outcome.is_fail(),
            record: legitimate_winner(trace, coalition),
            winner_color: trace.outcome.color(),
            honest_shares,
            coalition_share: if active.is_empty() { 0.0 } else { members as f64 / active.len() as f64 },
        }
    }

    /// Whether the exact check applies: a good, non-failing run whose legitimate winner is honest.
    pub fn claim1_applies(&self) -> bool {
        self.good && !self.failed && !self.record.e_c
    }

    pub fn claim1_holds(&self) -> bool {
        self.record.winner.is_some() && self.record.winner == self.record.legitimate_winner
    }
}

/// Running tallies for the three audits; merge order does not matter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClaimsAudit {
    pub traces: u64,
    pub good: u64,
    /// Traces the exact winner check applied to, and how many broke it.
    pub claim1_checked: u64,
    pub claim1_violations: u64,
    /// Good, non-failing runs whose legitimate winner is honest.
    pub claim3_samples: u64,
    pub claim3_wins: Vec<u64>,
    pub claim3_share_sum: Vec<f64>,
    /// Good runs, and how many of them a coalition member won.
    pub claim4_samples: u64,
    pub claim4_coalition_wins: u64,
    pub claim4_bound_sum: f64,
}

impl ClaimsAudit {
    pub fn observe(&mut self, obs: &ClaimObservation) {
        self.traces += 1;
        if !obs.good {
            return;
        }
        self.good += 1;
        self.claim4_samples += 1;
        self.claim4_coalition_wins += obs.record.e_c_prime as u64;
        self.claim4_bound_sum += obs.coalition_share;
        if obs.claim1_applies() {
            self.claim1_checked += 1;
            self.claim1_violations += !obs.claim1_holds() as u64;
            let sigma = obs.honest_shares.len();
            if self.claim3_wins.len() < sigma {
                self.claim3_wins.resize(sigma, 0);
                self.claim3_share_sum.resize(sigma, 0.0);
            }
            self.claim3_samples += 1;
            if let Some(c) = obs.winner_color {
                self.claim3_wins[c.0 as usize - 1] += 1;
            }
            for (acc, x) in self.claim3_share_sum.iter_mut().zip(&obs.honest_shares) {
                *acc += x;
            }
        }
    }

    pub fn merge(&mut self, other: &ClaimsAudit) {
        self.traces += other.traces;
        self.good += other.good;
        self.claim1_checked += other.claim1_checked;
        self.claim1_violations += other.claim1_violations;
        self.claim3_samples += other.claim3_samples;
        let sigma = self.claim3_wins.len().max(other.claim3_wins.len());
        self.claim3_wins.resize(sigma, 0);
        self.claim3_share_sum.resize(sigma, 0.0);
        for (i, w) in other.claim3_wins.iter().enumerate() {
            self.claim3_wins[i] += w;
            self.claim3_share_sum[i] += other.claim3_share_sum[i];
        }
        self.claim4_samples += other.claim4_samples;
        self.claim4_coalition_wins += other.claim4_coalition_wins;
        self.claim4_bound_sum += other.claim4_bound_sum;
    }

    pub fn coalition_win_rate(&self) -> f64 {
        self.claim4_coalition_wins as f64 / self.claim4_samples.max(1) as f64
    }

    pub fn verdict(&self, sigma_mult: f64) -> ClaimsVerdict {
        let claim1 = if self.claim1_checked == 0 {
            Verdict::Indeterminate
        } else {
            Verdict::from_bool(self.claim1_violations == 0)
        };

        let n3 = self.claim3_samples;
        let claim3_colors: Vec<ColorShareCheck> = (0..self.claim3_wins.len())
            .map(|i| {
                let expected = self.claim3_share_sum[i] / n3.max(1) as f64;
                let observed = self.claim3_wins[i] as f64 / n3.max(1) as f64;
                let tolerance = binomial_tolerance(expected, n3, sigma_mult);
                ColorShareCheck {
                    color: Color(i as u32 + 1),
                    observed,
                    expected,
                    tolerance,
                    pass: (observed - expected).abs() <= tolerance + 1e-12,
                }
            })
            .collect();
        let claim3 =
            if n3 == 0 { Verdict::Indeterminate } else { Verdict::from_bool(claim3_colors.iter().all(|c| c.pass)) };

        let n4 = self.claim4_samples;
        let claim4_bound = self.claim4_bound_sum / n4.max(1) as f64;
        let claim4_slack = binomial_tolerance(claim4_bound, n4, sigma_mult);
        let claim4_rate = self.coalition_win_rate();
        let claim4 = if n4 == 0 {
            Verdict::Indeterminate
        } else {
            Verdict::from_bool(claim4_rate <= claim4_bound + claim4_slack)
        };

        ClaimsVerdict { claim1, claim3, claim3_colors, claim4, claim4_rate, claim4_bound, claim4_slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorShareCheck {
    pub color: Color,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsVerdict {
    /// Exact: the winner equals the legitimate winner on every applicable trace.
    pub claim1: Verdict,
    /// Statistical: wins given an honest legitimate winner follow the honest shares.
    pub claim3: Verdict,
    pub claim3_colors: Vec<ColorShareCheck>,
    /// Statistical: the coalition wins at most its share of active agents.
    pub claim4: Verdict,
    pub claim4_rate: f64,
    pub claim4_bound: f64,
    pub claim4_slack: f64,
}

impl ClaimsVerdict {
    /// Indeterminate audits do not count against the result.
    pub fn passed(&self) -> bool {
        [self.claim1, self.claim3, self.claim4].iter().all(|v| *v != Verdict::Fail)
    }
}

/// Audits a batch of traces against `coalition`.
pub fn claims_audit<'a>(
    traces: impl IntoIterator<Item = &'a Trace>,
    coalition: &BTreeSet<AgentId>,
    calib: &CalibrationConstants,
) -> ClaimsAudit {
    let mut audit = ClaimsAudit::default();
    for t in traces {
        let flags = classify_good_execution(t, calib);
        audit.observe(&ClaimObservation::of(t, &flags, coalition));
    }
    audit
}
