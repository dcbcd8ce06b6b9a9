use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::certificate::Certificate;
use super::ledger::Ledger;
use super::params::{AgentId, Color};
use super::tally::Tally;
use super::vote::VoteIntention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    VotingIntention,
    Commitment,
    Voting,
    FindMin,
    Coherence,
    Verification,
    Done,
}

impl Phase {
    pub const NETWORKED: [Phase; 4] = [Phase::Commitment, Phase::Voting, Phase::FindMin, Phase::Coherence];

    pub fn label(self) -> &'static str {
        match self {
            Phase::VotingIntention => "voting-intention",
            Phase::Commitment => "commitment",
            Phase::Voting => "voting",
            Phase::FindMin => "find-min",
            Phase::Coherence => "coherence",
            Phase::Verification => "verification",
            Phase::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Faulty,
    Active,
    /// Absorbing.
    Failed,
    Decided(Color),
}

/// Local data of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub color: Color,
    pub status: Status,
    /// The agent's own vote intention (what it actually votes from).
    pub intention: Arc<VoteIntention>,
    pub ledger: Ledger,
    pub tally: Tally,
    /// Set once, when Voting ends.
    pub k: Option<u64>,
    pub ce_min: Option<Arc<Certificate>>,
    pub phase: Phase,
}

impl AgentState {
    pub fn new(id: AgentId, color: Color, faulty: bool) -> Self {
        AgentState {
            id,
            color,
            status: if faulty { Status::Faulty } else { Status::Active },
            intention: Arc::new(VoteIntention::from_pairs(std::iter::empty())),
            ledger: Ledger::new(),
            tally: Tally::new(),
            k: None,
            ce_min: None,
            phase: Phase::VotingIntention,
        }
    }

    pub fn is_faulty(&self) -> bool {
        self.status == Status::Faulty
    }

    pub fn is_failed(&self) -> bool {
        self.status == Status::Failed
    }

    /// Active from round 0, whether or not it later failed.
    pub fn is_active(&self) -> bool {
        !self.is_faulty()
    }

    /// Moves to `Failed` unless faulty; already-failed stays failed.
    pub fn fail(&mut self) {
        if !self.is_faulty() {
            self.status = Status::Failed;
        }
    }
}
