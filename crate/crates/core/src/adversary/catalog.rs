//! Built-in deviations, one per family of attack the verification steps
//! are meant to stop.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use super::{DeviationStrategy, HookCtx, IntentionReply};
use crate::protocol::{compute_k, AgentId, Certificate, ReceivedVote, Tally, Vote, VoteIntention};

/// Follows the protocol at every hook.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestStrategy;

impl DeviationStrategy for HonestStrategy {
    fn name(&self) -> &str {
        "honest"
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UnderbidMode {
    /// Rewrite one received vote so the tally sums to zero.
    #[default]
    Adjust,
    /// Declare an empty tally.
    DropAll,
}

/// Declares `k = 0` backed by a fabricated tally; otherwise honest.
#[derive(Debug, Clone, Copy, Default)]
pub struct KUnderbid {
    pub mode: UnderbidMode,
}

impl DeviationStrategy for KUnderbid {
    fn name(&self) -> &str {
        "k_underbid"
    }

    fn declare_certificate(&self, ctx: &mut HookCtx<'_>, honest: Certificate) -> Certificate {
        let m = ctx.params.m;
        let w = match self.mode {
            UnderbidMode::DropAll => Tally::new(),
            UnderbidMode::Adjust => {
                let mut votes: Vec<ReceivedVote> = honest.w.votes().to_vec();
                if let Some(last) = votes.last_mut() {
                    // (h - k) mod m zeroes the total.
                    let h = last.h % m;
                    last.h = ((h as u128 + m as u128 - honest.k as u128) % m as u128) as u64;
                }
                Tally::from_votes(votes)
            }
        };
        debug_assert_eq!(compute_k(&w, m), 0);
        Certificate { k: 0, w, ..honest }
    }
}

/// Declares one list during Commitment but pushes other values while voting.
///
/// Votes aimed at a fellow member are chosen to drive that member's running
/// sum to zero; other votes get a fresh random value. With `per_peer` the
/// member also hands every puller its own fabricated list (stable per puller).
#[derive(Debug, Clone, Copy)]
pub struct CommitmentMismatch {
    pub per_peer: bool,
    pub steer: bool,
}

impl Default for CommitmentMismatch {
    fn default() -> Self {
        CommitmentMismatch { per_peer: false, steer: true }
    }
}

fn salt_key(member: AgentId) -> String {
    format!("commitment_mismatch.salt.{}", member.0)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl DeviationStrategy for CommitmentMismatch {
    fn name(&self) -> &str {
        "commitment_mismatch"
    }

    fn choose_intention(&self, ctx: &mut HookCtx<'_>, honest: VoteIntention) -> VoteIntention {
        let salt: i64 = ctx.rng.gen();
        ctx.blackboard.notes.insert(salt_key(ctx.member), salt);
        honest
    }

    fn reply_to_pull(&self, ctx: &mut HookCtx<'_>, puller: AgentId, honest: &Arc<VoteIntention>) -> IntentionReply {
        if !self.per_peer {
            return IntentionReply::Intention(honest.clone());
        }
        let salt = ctx.blackboard.notes.get(&salt_key(ctx.member)).copied().unwrap_or(0) as u64;
        let m = ctx.params.m;
        let fabricated = VoteIntention::from_pairs(honest.votes().iter().map(|v| {
            let mix = splitmix(salt ^ splitmix(((puller.0 as u64) << 32) | v.j as u64));
            (1 + mix % m, v.z)
        }));
        IntentionReply::Intention(Arc::new(fabricated))
    }

    fn choose_vote(&self, ctx: &mut HookCtx<'_>, _j: u32, honest: Option<Vote>) -> Option<(AgentId, u64)> {
        let v = honest?;
        let m = ctx.params.m;
        let steered =
            if self.steer { ctx.member_state(v.z).map(|target| (m - compute_k(&target.tally, m)) % m) } else { None };
        let value = match steered {
            Some(h) if h != v.h => h,
            _ if m == 1 => v.h + 1,
            _ => loop {
                let h = ctx.rng.gen_range(1..=m);
                if h != v.h {
                    break h;
                }
            },
        };
        Some((v.z, value))
    }
}

/// Pretends to be crashed during Commitment, then carries on.
#[derive(Debug, Clone, Copy, Default)]
pub struct FakeFaulty {
    /// Also withhold votes, so the member looks faulty through Voting.
    pub silent_in_voting: bool,
}

impl DeviationStrategy for FakeFaulty {
    fn name(&self) -> &str {
        "fake_faulty"
    }

    fn reply_to_pull(&self, _ctx: &mut HookCtx<'_>, _puller: AgentId, _honest: &Arc<VoteIntention>) -> IntentionReply {
        IntentionReply::Silent
    }

    fn choose_vote(&self, _ctx: &mut HookCtx<'_>, _j: u32, honest: Option<Vote>) -> Option<(AgentId, u64)> {
        if self.silent_in_voting {
            None
        } else {
            honest.map(|v| (v.z, v.h))
        }
    }
}

/// Which agents a silencing member refuses to talk to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum SilenceTargets {
    All,
    /// Ids in `[1, n/2]`.
    #[default]
    LowerHalf,
    /// Ids in `(n/2, n]`.
    UpperHalf,
    Explicit(BTreeSet<AgentId>),
}

impl SilenceTargets {
    pub fn contains(&self, id: AgentId, n: u32) -> bool {
        match self {
            SilenceTargets::All => true,
            SilenceTargets::LowerHalf => id.0 <= n / 2,
            SilenceTargets::UpperHalf => id.0 > n / 2,
            SilenceTargets::Explicit(set) => set.contains(&id),
        }
    }
}

/// Withholds Find-Min replies and Coherence pushes from a target subset,
/// trying to leave honest agents on different certificates.
#[derive(Debug, Clone, Default)]
pub struct CoherenceSilence {
    pub targets: SilenceTargets,
}

impl DeviationStrategy for CoherenceSilence {
    fn name(&self) -> &str {
        "coherence_silence"
    }

    fn findmin_reply(
        &self,
        ctx: &mut HookCtx<'_>,
        puller: AgentId,
        current: &Arc<Certificate>,
    ) -> Option<Arc<Certificate>> {
        (!self.targets.contains(puller, ctx.params.n)).then(|| current.clone())
    }

    fn coherence_push(
        &self,
        ctx: &mut HookCtx<'_>,
        honest_target: AgentId,
        current: &Arc<Certificate>,
    ) -> Option<(AgentId, Arc<Certificate>)> {
        (!self.targets.contains(honest_target, ctx.params.n)).then(|| (honest_target, current.clone()))
    }
}
