use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::message::{Message, MessageStats};
use crate::protocol::{AgentId, AgentState, Certificate, Outcome, Params, Phase, Status, VerifyResult, VoteIntention};

/// A status change of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub round: u32,
    pub phase: Phase,
    pub agent: AgentId,
    pub status: Status,
}

/// The first Commitment reply an agent sent to an honest (non-coalition) puller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstDeclaration {
    pub round: u32,
    pub to: AgentId,
    pub intention: Arc<VoteIntention>,
}

/// Full record of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: SimConfig,
    pub messages: Vec<Message>,
    pub transitions: Vec<Transition>,
    /// Final state, indexed by `AgentId::index`.
    pub agents: Vec<AgentState>,
    /// Certificate each active agent entered Find-Min with.
    pub declared: Vec<Option<Arc<Certificate>>>,
    /// Verification result of each agent that reached Verification.
    pub verification: Vec<Option<VerifyResult>>,
    pub first_declarations: BTreeMap<AgentId, FirstDeclaration>,
    pub winner: Option<AgentId>,
    pub outcome: Outcome,
    pub stats: MessageStats,
}

impl Trace {
    pub fn params(&self) -> &Params {
        &self.config.params
    }

    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id.index()]
    }

    pub fn coalition(&self) -> BTreeSet<AgentId> {
        self.config.members()
    }

    pub fn is_member(&self, id: AgentId) -> bool {
        self.config.is_member(id)
    }

    pub fn active(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.agents.iter().filter(|a| a.is_active()).map(|a| a.id)
    }

    /// Active agents outside the coalition.
    pub fn honest(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.active().filter(|a| !self.is_member(*a))
    }

    pub fn messages_in(&self, phase: Phase) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.phase == phase)
    }

    pub fn winner_color(&self) -> Option<crate::protocol::Color> {
        self.outcome.color()
    }
}
