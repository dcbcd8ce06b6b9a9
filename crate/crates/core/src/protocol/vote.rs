use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{AgentId, Params};
use crate::rng::uniform_agent;

/// One planned vote: value `h` pushed to `z` in voting round `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vote {
    pub h: u64,
    pub z: AgentId,
    pub j: u32,
}

/// The ordered list of `q` votes an agent commits to before voting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VoteIntention {
    votes: Vec<Vote>,
}

impl VoteIntention {
    /// Builds an intention from `(h, z)` pairs; round indices are assigned `1..=len`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, AgentId)>) -> Self {
        let votes = pairs.into_iter().enumerate().map(|(i, (h, z))| Vote { h, z, j: i as u32 + 1 }).collect();
        VoteIntention { votes }
    }

    /// Raw constructor that keeps whatever indices the caller supplies. Used
    /// by deviation strategies to build malformed replies.
    pub fn from_votes(votes: Vec<Vote>) -> Self {
        VoteIntention { votes }
    }

    pub fn votes(&self) -> &[Vote] {
        &self.votes
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    /// Vote of round `j` (1-based).
    pub fn get(&self, j: u32) -> Option<&Vote> {
        if j == 0 {
            return None;
        }
        self.votes.get(j as usize - 1).filter(|v| v.j == j)
    }

    /// Length `q`, indices `1..=q` in order, targets in `[1, n]`, values in `[1, m]`.
    pub fn is_well_formed(&self, params: &Params) -> bool {
        self.votes.len() == params.q as usize
            && self
                .votes
                .iter()
                .enumerate()
                .all(|(i, v)| v.j == i as u32 + 1 && (1..=params.n).contains(&v.z.0) && (1..=params.m).contains(&v.h))
    }

    /// Sum of this intention's votes aimed at `target`, reduced mod `m`.
    pub fn declared_for(&self, target: AgentId, m: u64) -> u64 {
        self.votes.iter().filter(|v| v.z == target).fold(0u64, |acc, v| add_mod(acc, v.h, m))
    }
}

/// `(a + b) mod m` without overflow for any `u64` inputs.
#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

/// Draws `q` votes with values uniform in `[1, m]` and targets uniform in `[1, n]`.
///
/// Zero is never drawn: it is reserved for marking a silent voter.
pub fn draw_vote_intention<R: Rng + ?Sized>(rng: &mut R, params: &Params) -> VoteIntention {
    VoteIntention::from_pairs((0..params.q).map(|_| {
        let h = rng.gen_range(1..=params.m);
        let z = uniform_agent(rng, params.n);
        (h, z)
    }))
}
