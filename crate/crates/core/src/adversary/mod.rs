//! Coalition deviations.
//!
//! A [`DeviationStrategy`] is consulted at every decision point of every
//! coalition member. Each hook receives the move the protocol would make and
//! returns the move the member actually makes; the defaults return the
//! honest move unchanged, so an empty `impl` is the honest strategy.
//!
//! Hooks can only choose a target and a payload. The engine stamps the
//! sender, so identities cannot be forged, and each hook returns at most one
//! operation, so the one-push-or-pull-per-round budget holds by construction.

mod catalog;
mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::protocol::{AgentId, AgentState, Certificate, Params, Phase, Status, Vote, VoteIntention};
use crate::rng::StreamRng;
use crate::sim::Message;

pub use catalog::{
    CoherenceSilence, CommitmentMismatch, FakeFaulty, HonestStrategy, KUnderbid, SilenceTargets, UnderbidMode,
};
pub use registry::{StrategyFactory, StrategyRegistry};

/// Strategy parameters as read from a config file.
pub type StrategyParams = serde_json::Map<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub name: String,
    #[serde(default)]
    pub params: StrategyParams,
}

impl StrategySpec {
    pub fn named(name: impl Into<String>) -> Self {
        StrategySpec { name: name.into(), params: StrategyParams::new() }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionSpec {
    pub members: BTreeSet<AgentId>,
    pub strategy: StrategySpec,
}

impl CoalitionSpec {
    pub fn new(members: impl IntoIterator<Item = AgentId>, strategy: StrategySpec) -> Self {
        CoalitionSpec { members: members.into_iter().collect(), strategy }
    }

    /// Set once `|C| * ln n >= n`, past the regime where equilibrium is guaranteed.
    pub fn regime_warning(&self, n: u32) -> bool {
        self.members.len() as f64 * (n as f64).ln() >= n as f64
    }
}

/// State shared by all coalition members. The engine appends every message
/// a member sent or received at the end of each round; `notes` is free
/// scratch space for strategies.
#[derive(Debug, Clone, Default)]
pub struct Blackboard {
    pub observed: Vec<Message>,
    pub notes: BTreeMap<String, i64>,
}

/// What a hook can see when it is consulted.
pub struct HookCtx<'a> {
    pub member: AgentId,
    pub phase: Phase,
    /// Global round, 0 for the local phases.
    pub round: u32,
    pub params: &'a Params,
    pub members: &'a BTreeSet<AgentId>,
    pub blackboard: &'a mut Blackboard,
    /// The member's private strategy stream.
    pub rng: &'a mut StreamRng,
    agents: &'a [AgentState],
}

impl<'a> HookCtx<'a> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        member: AgentId,
        phase: Phase,
        round: u32,
        params: &'a Params,
        members: &'a BTreeSet<AgentId>,
        blackboard: &'a mut Blackboard,
        rng: &'a mut StreamRng,
        agents: &'a [AgentState],
    ) -> Self {
        HookCtx { member, phase, round, params, members, blackboard, rng, agents }
    }

    /// State of a coalition member as of the start of the current round.
    /// Non-members are private and return `None`.
    pub fn member_state(&self, id: AgentId) -> Option<&AgentState> {
        if self.members.contains(&id) {
            self.agents.get(id.index())
        } else {
            None
        }
    }

    pub fn me(&self) -> &AgentState {
        &self.agents[self.member.index()]
    }

    pub fn is_member(&self, id: AgentId) -> bool {
        self.members.contains(&id)
    }
}

/// Answer to a Commitment pull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntentionReply {
    Intention(Arc<VoteIntention>),
    Silent,
}

pub trait DeviationStrategy: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// The list the member votes from (and declares, unless `reply_to_pull` says otherwise).
    fn choose_intention(&self, _ctx: &mut HookCtx<'_>, honest: VoteIntention) -> VoteIntention {
        honest
    }

    /// Commitment pull target, or `None` to stay idle this round.
    fn commitment_pull(&self, _ctx: &mut HookCtx<'_>, honest: AgentId) -> Option<AgentId> {
        Some(honest)
    }

    fn reply_to_pull(&self, _ctx: &mut HookCtx<'_>, _puller: AgentId, honest: &Arc<VoteIntention>) -> IntentionReply {
        IntentionReply::Intention(honest.clone())
    }

    /// Vote push for round `j` as `(target, value)`, or `None` for silence.
    /// `honest` is `None` when the member's own intention has no round `j`.
    fn choose_vote(&self, _ctx: &mut HookCtx<'_>, _j: u32, honest: Option<Vote>) -> Option<(AgentId, u64)> {
        honest.map(|v| (v.z, v.h))
    }

    fn declare_certificate(&self, _ctx: &mut HookCtx<'_>, honest: Certificate) -> Certificate {
        honest
    }

    fn findmin_pull(&self, _ctx: &mut HookCtx<'_>, honest: AgentId) -> Option<AgentId> {
        Some(honest)
    }

    fn findmin_reply(
        &self,
        _ctx: &mut HookCtx<'_>,
        _puller: AgentId,
        current: &Arc<Certificate>,
    ) -> Option<Arc<Certificate>> {
        Some(current.clone())
    }

    /// Coherence push as `(target, certificate)`, or `None` for silence.
    fn coherence_push(
        &self,
        _ctx: &mut HookCtx<'_>,
        honest_target: AgentId,
        current: &Arc<Certificate>,
    ) -> Option<(AgentId, Arc<Certificate>)> {
        Some((honest_target, current.clone()))
    }

    /// Final status of the member after Verification.
    fn final_decision(&self, _ctx: &mut HookCtx<'_>, honest: Status) -> Status {
        honest
    }
}

pub fn honest_strategy() -> Box<dyn DeviationStrategy> {
    Box::new(HonestStrategy)
}

pub fn k_underbid_strategy() -> Box<dyn DeviationStrategy> {
    Box::new(KUnderbid::default())
}

pub fn commitment_mismatch_strategy() -> Box<dyn DeviationStrategy> {
    Box::new(CommitmentMismatch::default())
}

pub fn fake_faulty_strategy() -> Box<dyn DeviationStrategy> {
    Box::new(FakeFaulty::default())
}

pub fn coherence_silence_strategy() -> Box<dyn DeviationStrategy> {
    Box::new(CoherenceSilence::default())
}
