use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::message::MessageKind;
use super::trace::Trace;
use crate::protocol::{AgentId, Phase};

/// Vote-count band `[beta1 ln n, beta2 ln n]` for the cooperative good-execution test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConstants {
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for CalibrationConstants {
    fn default() -> Self {
        CalibrationConstants { beta1: 0.2, beta2: 10.0 }
    }
}

/// The cooperative (`d2_*`) and coalition (`d3_*`) good-execution events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoodExecutionFlags {
    /// Every active agent received a number of votes inside the calibrated band.
    pub d2_votes_theta_logn: bool,
    /// Honest `k` values are pairwise distinct.
    pub d2_k_distinct: bool,
    /// Honest agents all hold the same certificate once Find-Min ends.
    pub d2_findmin_converged: bool,
    /// Every active agent was pulled during Commitment by at least one honest agent.
    pub d3_commit_covered: bool,
    /// Coherence failed, or honest agents all hold one certificate.
    pub d3_coherence_agree_or_fail: bool,
    /// Every active agent is a vote target of some honest agent the coalition never pulled.
    pub d3_untainted_voter: bool,
}

impl GoodExecutionFlags {
    pub fn all(&self) -> bool {
        self.cooperative() && self.coalition()
    }

    pub fn cooperative(&self) -> bool {
        self.d2_votes_theta_logn && self.d2_k_distinct && self.d2_findmin_converged
    }

    pub fn coalition(&self) -> bool {
        self.d3_commit_covered && self.d3_coherence_agree_or_fail && self.d3_untainted_voter
    }

    /// Goodness of a run in which the coalition deviates: the three coalition
    /// events plus uniqueness of honest `k` values.
    pub fn good_under_deviation(&self) -> bool {
        self.coalition() && self.d2_k_distinct
    }
}

pub fn classify_good_execution(trace: &Trace, calib: &CalibrationConstants) -> GoodExecutionFlags {
    let n = trace.params().n;
    let ln_n = (n as f64).ln();
    let (lo, hi) = (calib.beta1 * ln_n, calib.beta2 * ln_n);
    let active: Vec<AgentId> = trace.active().collect();
    let honest: Vec<AgentId> = trace.honest().collect();

    let d2_votes_theta_logn = active.iter().all(|&u| {
        let x = trace.agent(u).tally.len() as f64;
        lo <= x && x <= hi
    });

    let mut ks: Vec<u64> = honest.iter().filter_map(|&u| trace.agent(u).k).collect();
    ks.sort_unstable();
    let d2_k_distinct = ks.windows(2).all(|w| w[0] != w[1]);

    let d2_findmin_converged = {
        let mut certs = honest.iter().map(|&u| trace.agent(u).ce_min.as_ref());
        match certs.next() {
            None => true,
            Some(first) => certs.all(|c| match (first, c) {
                (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
                _ => false,
            }),
        }
    };

    let mut pulled_by_honest = BTreeSet::new();
    let mut pulled_by_coalition = BTreeSet::new();
    for m in trace.messages_in(Phase::Commitment).filter(|m| m.kind == MessageKind::PullRequest) {
        if trace.is_member(m.sender) {
            pulled_by_coalition.insert(m.receiver);
        } else {
            pulled_by_honest.insert(m.receiver);
        }
    }
    let d3_commit_covered = active.iter().all(|u| pulled_by_honest.contains(u));

    let coherence_failed = trace.transitions.iter().any(|t| t.phase == Phase::Coherence && !trace.is_member(t.agent));
    let d3_coherence_agree_or_fail = coherence_failed || d2_findmin_converged;

    let mut untainted_targets = BTreeSet::new();
    for &v in honest.iter().filter(|v| !pulled_by_coalition.contains(v)) {
        untainted_targets.extend(trace.agent(v).intention.votes().iter().map(|x| x.z));
    }
    let d3_untainted_voter = active.iter().all(|u| untainted_targets.contains(u));

    GoodExecutionFlags {
        d2_votes_theta_logn,
        d2_k_distinct,
        d2_findmin_converged,
        d3_commit_covered,
        d3_coherence_agree_or_fail,
        d3_untainted_voter,
    }
}
