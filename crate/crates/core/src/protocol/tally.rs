use serde::{Deserialize, Serialize};

use super::params::AgentId;
use super::vote::add_mod;

/// A vote as seen by its receiver: value, authenticated sender, voting round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReceivedVote {
    pub sender: AgentId,
    pub j: u32,
    pub h: u64,
}

/// Votes an agent received during Voting, kept sorted by `(sender, j)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tally {
    received: Vec<ReceivedVote>,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tally from arbitrary votes, keeping the first of any duplicate `(sender, j)`.
    pub fn from_votes(votes: impl IntoIterator<Item = ReceivedVote>) -> Self {
        let mut t = Tally::new();
        for v in votes {
            t.insert(v);
        }
        t
    }

    /// Inserts a vote unless `(sender, j)` is already present.
    pub fn insert(&mut self, vote: ReceivedVote) -> bool {
        match self.position(vote.sender, vote.j) {
            Ok(_) => false,
            Err(pos) => {
                self.received.insert(pos, vote);
                true
            }
        }
    }

    fn position(&self, sender: AgentId, j: u32) -> Result<usize, usize> {
        self.received.binary_search_by(|v| (v.sender, v.j).cmp(&(sender, j)))
    }

    pub fn get(&self, sender: AgentId, j: u32) -> Option<&ReceivedVote> {
        self.position(sender, j).ok().map(|i| &self.received[i])
    }

    pub fn votes(&self) -> &[ReceivedVote] {
        &self.received
    }

    pub fn len(&self) -> usize {
        self.received.len()
    }

    pub fn is_empty(&self) -> bool {
        self.received.is_empty()
    }
}

/// `(sum of all h in tally) mod m`.
pub fn compute_k(tally: &Tally, m: u64) -> u64 {
    sum_mod(tally.votes().iter().map(|v| v.h), m)
}

pub(crate) fn sum_mod(values: impl IntoIterator<Item = u64>, m: u64) -> u64 {
    values.into_iter().fold(0, |acc, h| add_mod(acc, h, m))
}
