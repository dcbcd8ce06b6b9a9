use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::protocol::{add_mod, AgentId};
use crate::sim::Trace;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegitimateWinnerRecord {
    /// `k*_u` for every active agent: the sum of the votes first declared for it.
    pub k_star: BTreeMap<AgentId, u64>,
    /// `None` only when no agent is active.
    pub legitimate_winner: Option<AgentId>,
    /// Owner of the certificate the deciding agents ended with.
    pub winner: Option<AgentId>,
    /// The legitimate winner is a coalition member.
    pub e_c: bool,
    /// The run did not fail and its winner is a coalition member.
    pub e_c_prime: bool,
}

/// Recomputes `k*` from the first declarations in `trace` and compares the
/// honest minimum `a` (by actual `k`) with the coalition minimum `b` (by `k*`):
/// the legitimate winner is `a` if `k_a < k*_b`, else `b`. Ties inside either
/// group go to the lowest id.
///
/// A voter that never answered an honest puller, or whose first answer was
/// malformed, contributes nothing.
pub fn legitimate_winner(trace: &Trace, coalition: &BTreeSet<AgentId>) -> LegitimateWinnerRecord {
    let params = trace.params();
    let m = params.m;
    let mut k_star: BTreeMap<AgentId, u64> = trace.active().map(|u| (u, 0)).collect();
    for decl in trace.first_declarations.values() {
        if !decl.intention.is_well_formed(params) {
            continue;
        }
        for v in decl.intention.votes() {
            if let Some(k) = k_star.get_mut(&v.z) {
                *k = add_mod(*k, v.h, m);
            }
        }
    }

    let a = trace.active().filter(|u| !coalition.contains(u)).filter_map(|u| trace.agent(u).k.map(|k| (k, u))).min();
    let b = k_star.iter().filter(|(u, _)| coalition.contains(u)).map(|(&u, &k)| (k, u)).min();
    let legitimate = match (a, b) {
        (Some((ka, a)), Some((kb, _))) if ka < kb => Some(a),
        (_, Some((_, b))) => Some(b),
        (Some((_, a)), None) => Some(a),
        (None, None) => None,
    };

    let winner = trace.winner;
    let e_c = legitimate.is_some_and(|u| coalition.contains(&u));
    let e_c_prime = !trace.outcome.is_fail() && winner.is_some_and(|u| coalition.contains(&u));
    LegitimateWinnerRecord { k_star, legitimate_winner: legitimate, winner, e_c, e_c_prime }
}
