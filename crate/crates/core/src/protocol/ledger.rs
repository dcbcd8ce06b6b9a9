use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::{AgentId, Params};
use super::vote::VoteIntention;

/// What a pulling agent got back during Commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommitmentReply {
    Intention(Arc<VoteIntention>),
    NoReply,
}

/// What the ledger holds about one voter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VoterRecord {
    Declared(Arc<VoteIntention>),
    /// The voter did not answer, or answered with something malformed: all
    /// of its `q` votes count as zero.
    FaultyMark,
}

/// One `(voter, j)` entry in the flattened view of a ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub voter: AgentId,
    pub j: u32,
    pub h: u64,
    /// `None` for a faulty mark.
    pub z: Option<AgentId>,
}

/// Vote intentions collected by one agent's Commitment pulls.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    voters: BTreeMap<AgentId, VoterRecord>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the answer to one pull. Malformed intentions count as no reply.
    /// A later reply from the same voter replaces the earlier record.
    pub fn record_commitment(&mut self, voter: AgentId, reply: CommitmentReply, params: &Params) {
        let record = match reply {
            CommitmentReply::Intention(h) if h.is_well_formed(params) => VoterRecord::Declared(h),
            _ => VoterRecord::FaultyMark,
        };
        self.voters.insert(voter, record);
    }

    pub fn record(&self, voter: AgentId) -> Option<&VoterRecord> {
        self.voters.get(&voter)
    }

    pub fn is_faulty_marked(&self, voter: AgentId) -> bool {
        matches!(self.voters.get(&voter), Some(VoterRecord::FaultyMark))
    }

    pub fn faulty_marks(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.voters.iter().filter(|(_, r)| matches!(r, VoterRecord::FaultyMark)).map(|(v, _)| *v)
    }

    pub fn voters(&self) -> impl Iterator<Item = (AgentId, &VoterRecord)> + '_ {
        self.voters.iter().map(|(v, r)| (*v, r))
    }

    pub fn covers(&self, voter: AgentId) -> bool {
        self.voters.contains_key(&voter)
    }

    /// Entry keyed `(voter, j)`. Faulty marks answer `h = 0` for every `j` in `[1, q]`.
    pub fn entry(&self, voter: AgentId, j: u32, q: u32) -> Option<LedgerEntry> {
        match self.voters.get(&voter)? {
            VoterRecord::Declared(h) => h.get(j).map(|v| LedgerEntry { voter, j, h: v.h, z: Some(v.z) }),
            VoterRecord::FaultyMark => (1..=q).contains(&j).then_some(LedgerEntry { voter, j, h: 0, z: None }),
        }
    }

    /// Every `(voter, j)` entry, ordered by voter then round.
    pub fn entries(&self, q: u32) -> impl Iterator<Item = LedgerEntry> + '_ {
        self.voters.iter().flat_map(move |(&voter, r)| -> Box<dyn Iterator<Item = LedgerEntry> + '_> {
            match r {
                VoterRecord::Declared(h) => {
                    Box::new(h.votes().iter().map(move |v| LedgerEntry { voter, j: v.j, h: v.h, z: Some(v.z) }))
                }
                VoterRecord::FaultyMark => Box::new((1..=q).map(move |j| LedgerEntry { voter, j, h: 0, z: None })),
            }
        })
    }

    pub fn len_voters(&self) -> usize {
        self.voters.len()
    }
}

/// Functional form of [`Ledger::record_commitment`].
pub fn record_commitment(mut ledger: Ledger, voter: AgentId, reply: CommitmentReply, params: &Params) -> Ledger {
    ledger.record_commitment(voter, reply, params);
    ledger
}
