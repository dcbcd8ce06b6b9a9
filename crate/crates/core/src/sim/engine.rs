//! Synchronous round scheduler.
//!
//! Each round runs in two steps: every agent decides its operation from the
//! state at the start of the round, then all operations are delivered. A
//! pull is answered within its round from the replier's start-of-round state.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::config::SimConfig;
use super::message::{message_size_bits, Message, MessageKind, MessageStats, Payload};
use super::trace::{FirstDeclaration, Trace, Transition};
use crate::adversary::{Blackboard, DeviationStrategy, HookCtx, IntentionReply, StrategyRegistry};
use crate::error::ConfigError;
use crate::protocol::{
    compute_k, draw_vote_intention, verify_certificate, AgentId, AgentState, Certificate, CommitmentReply, Outcome,
    Params, Phase, ReceivedVote, Status, VerifyResult,
};
use crate::rng::{agent_stream, uniform_agent, StreamLabel, StreamRng};

struct AgentRngs {
    commitment: StreamRng,
    findmin: StreamRng,
    coherence: StreamRng,
    strategy: StreamRng,
}

impl AgentRngs {
    fn new(seed: u64, id: AgentId) -> Self {
        AgentRngs {
            commitment: agent_stream(seed, id, StreamLabel::Commitment),
            findmin: agent_stream(seed, id, StreamLabel::FindMin),
            coherence: agent_stream(seed, id, StreamLabel::Coherence),
            strategy: agent_stream(seed, id, StreamLabel::Strategy),
        }
    }
}

/// A trial ready to run.
pub struct SimState {
    config: SimConfig,
    params: Params,
    agents: Vec<AgentState>,
    rngs: Vec<AgentRngs>,
    active: Vec<AgentId>,
    members: BTreeSet<AgentId>,
    strategy: Option<Box<dyn DeviationStrategy>>,
    blackboard: Blackboard,
    messages: Vec<Message>,
    transitions: Vec<Transition>,
    first_declarations: BTreeMap<AgentId, FirstDeclaration>,
    declared: Vec<Option<Arc<Certificate>>>,
    verification: Vec<Option<VerifyResult>>,
}

/// Validates `config` and creates the agents, resolving the coalition
/// strategy from the built-in registry.
pub fn init_simulation(config: &SimConfig) -> Result<SimState, ConfigError> {
    init_simulation_with(config, &StrategyRegistry::default())
}

pub fn init_simulation_with(config: &SimConfig, registry: &StrategyRegistry) -> Result<SimState, ConfigError> {
    let strategy = match &config.coalition {
        Some(c) if !c.members.is_empty() => Some(registry.build(&c.strategy)?),
        _ => None,
    };
    SimState::new(config, strategy)
}

/// Runs one trial to completion.
pub fn run_trial(config: &SimConfig) -> Result<Trace, ConfigError> {
    Ok(init_simulation(config)?.run())
}

/// Runs one trial with an already-built strategy for the coalition in `config`.
pub fn run_trial_with_strategy(config: &SimConfig, strategy: Box<dyn DeviationStrategy>) -> Result<Trace, ConfigError> {
    Ok(SimState::new(config, Some(strategy))?.run())
}

impl SimState {
    pub fn new(config: &SimConfig, strategy: Option<Box<dyn DeviationStrategy>>) -> Result<Self, ConfigError> {
        config.validate()?;
        let params = config.params;
        let agents: Vec<AgentState> =
            params.agents().map(|id| AgentState::new(id, config.color_of(id), config.is_faulty(id))).collect();
        let rngs = params.agents().map(|id| AgentRngs::new(config.seed, id)).collect();
        let active = config.active().collect();
        let members = config.members();
        let strategy = if members.is_empty() { None } else { strategy };
        let n = params.n as usize;
        Ok(SimState {
            config: config.clone(),
            params,
            agents,
            rngs,
            active,
            members,
            strategy,
            blackboard: Blackboard::default(),
            messages: Vec::new(),
            transitions: Vec::new(),
            first_declarations: BTreeMap::new(),
            declared: vec![None; n],
            verification: vec![None; n],
        })
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    fn is_member(&self, id: AgentId) -> bool {
        self.strategy.is_some() && self.members.contains(&id)
    }

    fn in_range(&self, id: AgentId) -> bool {
        (1..=self.params.n).contains(&id.0)
    }

    fn hook<T>(
        &mut self,
        member: AgentId,
        phase: Phase,
        round: u32,
        f: impl FnOnce(&dyn DeviationStrategy, &mut HookCtx<'_>) -> T,
    ) -> T {
        let strategy = self.strategy.as_deref().expect("hook called without a coalition");
        let mut ctx = HookCtx::new(
            member,
            phase,
            round,
            &self.params,
            &self.members,
            &mut self.blackboard,
            &mut self.rngs[member.index()].strategy,
            &self.agents,
        );
        f(strategy, &mut ctx)
    }

    fn log(
        &mut self,
        round: u32,
        phase: Phase,
        kind: MessageKind,
        sender: AgentId,
        receiver: AgentId,
        payload: Payload,
    ) {
        let payload_bits = message_size_bits(kind, &payload, &self.params);
        self.messages.push(Message { round, phase, kind, sender, receiver, payload, payload_bits });
    }

    fn transition(&mut self, round: u32, phase: Phase, agent: AgentId) {
        let status = self.agents[agent.index()].status;
        self.transitions.push(Transition { round, phase, agent, status });
    }

    /// Hands the coalition every message since `from` that one of its members sent or received.
    fn share_with_coalition(&mut self, from: usize) {
        if self.strategy.is_none() {
            return;
        }
        let members = &self.members;
        self.blackboard.observed.extend(
            self.messages[from..]
                .iter()
                .filter(|m| members.contains(&m.sender) || members.contains(&m.receiver))
                .cloned(),
        );
    }

    fn set_phase(&mut self, phase: Phase) {
        for id in &self.active {
            self.agents[id.index()].phase = phase;
        }
    }

    pub fn run(mut self) -> Trace {
        self.voting_intention();
        self.commitment();
        self.voting();
        self.find_min();
        self.coherence();
        self.verification();
        self.finish()
    }

    fn voting_intention(&mut self) {
        self.set_phase(Phase::VotingIntention);
        for id in self.active.clone() {
            let mut rng = agent_stream(self.config.seed, id, StreamLabel::VotingIntention);
            let honest = draw_vote_intention(&mut rng, &self.params);
            let intention = if self.is_member(id) {
                self.hook(id, Phase::VotingIntention, 0, |s, ctx| s.choose_intention(ctx, honest))
            } else {
                honest
            };
            self.agents[id.index()].intention = Arc::new(intention);
        }
    }

    fn commitment(&mut self) {
        self.set_phase(Phase::Commitment);
        let phase = Phase::Commitment;
        for round in 1..=self.params.q {
            let start = self.messages.len();
            let mut pulls = Vec::with_capacity(self.active.len());
            for u in self.active.clone() {
                let honest = uniform_agent(&mut self.rngs[u.index()].commitment, self.params.n);
                let target = if self.is_member(u) {
                    self.hook(u, phase, round, |s, ctx| s.commitment_pull(ctx, honest))
                } else {
                    Some(honest)
                };
                if let Some(v) = target.filter(|v| self.in_range(*v)) {
                    pulls.push((u, v));
                }
            }
            let mut replies = Vec::with_capacity(pulls.len());
            for &(u, v) in &pulls {
                let target = &self.agents[v.index()];
                let reply = if target.is_faulty() {
                    CommitmentReply::NoReply
                } else if u == v || !self.is_member(v) {
                    CommitmentReply::Intention(target.intention.clone())
                } else {
                    let own = target.intention.clone();
                    match self.hook(v, phase, round, |s, ctx| s.reply_to_pull(ctx, u, &own)) {
                        IntentionReply::Intention(h) => CommitmentReply::Intention(h),
                        IntentionReply::Silent => CommitmentReply::NoReply,
                    }
                };
                replies.push(reply);
            }
            for ((u, v), reply) in pulls.into_iter().zip(replies) {
                self.log(round, phase, MessageKind::PullRequest, u, v, Payload::None);
                if let CommitmentReply::Intention(h) = &reply {
                    self.log(round, phase, MessageKind::IntentionReply, v, u, Payload::Intention(h.clone()));
                    if !self.is_member(u) {
                        self.first_declarations.entry(v).or_insert_with(|| FirstDeclaration {
                            round,
                            to: u,
                            intention: h.clone(),
                        });
                    }
                }
                let params = self.params;
                self.agents[u.index()].ledger.record_commitment(v, reply, &params);
            }
            self.share_with_coalition(start);
        }
    }

    fn voting(&mut self) {
        self.set_phase(Phase::Voting);
        let phase = Phase::Voting;
        let q = self.params.q;
        for j in 1..=q {
            let round = q + j;
            let start = self.messages.len();
            let mut pushes = Vec::with_capacity(self.active.len());
            for u in self.active.clone() {
                let honest = self.agents[u.index()].intention.get(j).copied();
                let choice = if self.is_member(u) {
                    self.hook(u, phase, round, |s, ctx| s.choose_vote(ctx, j, honest))
                } else {
                    honest.map(|v| (v.z, v.h))
                };
                if let Some((z, h)) = choice.filter(|(z, _)| self.in_range(*z)) {
                    pushes.push((u, z, h));
                }
            }
            for (u, z, h) in pushes {
                self.log(round, phase, MessageKind::VotePush, u, z, Payload::Vote { h, j });
                let receiver = &mut self.agents[z.index()];
                if !receiver.is_faulty() {
                    receiver.tally.insert(ReceivedVote { sender: u, j, h });
                }
            }
            self.share_with_coalition(start);
        }
        let m = self.params.m;
        for id in &self.active {
            let a = &mut self.agents[id.index()];
            a.k = Some(compute_k(&a.tally, m));
        }
    }

    fn find_min(&mut self) {
        self.set_phase(Phase::FindMin);
        let phase = Phase::FindMin;
        let q = self.params.q;
        let round0 = 2 * q;
        for id in self.active.clone() {
            let a = &self.agents[id.index()];
            let honest = Certificate::honest(a.tally.clone(), a.color, id, self.params.m);
            let cert = if self.is_member(id) {
                self.hook(id, phase, round0, |s, ctx| s.declare_certificate(ctx, honest))
            } else {
                honest
            };
            let cert = Arc::new(cert);
            self.declared[id.index()] = Some(cert.clone());
            self.agents[id.index()].ce_min = Some(cert);
        }
        for r in 1..=q {
            let round = round0 + r;
            let start = self.messages.len();
            let mut pulls = Vec::with_capacity(self.active.len());
            for u in self.active.clone() {
                let honest = uniform_agent(&mut self.rngs[u.index()].findmin, self.params.n);
                let target = if self.is_member(u) {
                    self.hook(u, phase, round, |s, ctx| s.findmin_pull(ctx, honest))
                } else {
                    Some(honest)
                };
                if let Some(v) = target.filter(|v| self.in_range(*v)) {
                    pulls.push((u, v));
                }
            }
            let mut replies = Vec::with_capacity(pulls.len());
            for &(u, v) in &pulls {
                let target = &self.agents[v.index()];
                let reply = match &target.ce_min {
                    _ if target.is_faulty() => None,
                    Some(c) if u == v || !self.is_member(v) => Some(c.clone()),
                    Some(c) => {
                        let current = c.clone();
                        self.hook(v, phase, round, |s, ctx| s.findmin_reply(ctx, u, &current))
                    }
                    None => None,
                };
                replies.push(reply);
            }
            for ((u, v), reply) in pulls.into_iter().zip(replies) {
                self.log(round, phase, MessageKind::PullRequest, u, v, Payload::None);
                if let Some(c) = reply {
                    self.log(round, phase, MessageKind::CertReply, v, u, Payload::Cert(c.clone()));
                    let mine = &mut self.agents[u.index()].ce_min;
                    if mine.as_ref().is_some_and(|cur| c.k < cur.k) {
                        *mine = Some(c);
                    }
                }
            }
            self.share_with_coalition(start);
        }
    }

    fn coherence(&mut self) {
        self.set_phase(Phase::Coherence);
        let phase = Phase::Coherence;
        let q = self.params.q;
        for r in 1..=q {
            let round = 3 * q + r;
            let start = self.messages.len();
            let mut pushes = Vec::with_capacity(self.active.len());
            for u in self.active.clone() {
                // Drawn even when silent so the stream stays aligned across runs.
                let honest = uniform_agent(&mut self.rngs[u.index()].coherence, self.params.n);
                let a = &self.agents[u.index()];
                if a.is_failed() {
                    continue;
                }
                let Some(current) = a.ce_min.clone() else { continue };
                let choice = if self.is_member(u) {
                    self.hook(u, phase, round, |s, ctx| s.coherence_push(ctx, honest, &current))
                } else {
                    Some((honest, current))
                };
                if let Some((v, c)) = choice.filter(|(v, _)| self.in_range(*v)) {
                    pushes.push((u, v, c));
                }
            }
            for (u, v, c) in pushes {
                self.log(round, phase, MessageKind::CertPush, u, v, Payload::Cert(c.clone()));
                let receiver = &mut self.agents[v.index()];
                if receiver.status != Status::Active {
                    continue;
                }
                let same = receiver.ce_min.as_ref().is_some_and(|mine| Arc::ptr_eq(mine, &c) || **mine == *c);
                if !same {
                    receiver.fail();
                    self.transition(round, phase, v);
                }
            }
            self.share_with_coalition(start);
        }
    }

    fn verification(&mut self) {
        self.set_phase(Phase::Verification);
        let phase = Phase::Verification;
        let round = self.params.total_rounds();
        for id in self.active.clone() {
            let a = &self.agents[id.index()];
            if a.is_failed() {
                continue;
            }
            let result = match &a.ce_min {
                Some(c) => verify_certificate(c, &a.ledger, &self.params),
                None => continue,
            };
            self.verification[id.index()] = Some(result);
            let honest = match result {
                VerifyResult::Accept(c) => Status::Decided(c),
                VerifyResult::Fail(_) => Status::Failed,
            };
            let status = if self.is_member(id) {
                self.hook(id, phase, round, |s, ctx| s.final_decision(ctx, honest))
            } else {
                honest
            };
            self.agents[id.index()].status = status;
            self.transition(round, phase, id);
        }
        self.set_phase(Phase::Done);
    }

    fn finish(self) -> Trace {
        let deciders: Vec<&AgentState> = {
            let honest: Vec<&AgentState> = self
                .active
                .iter()
                .map(|id| &self.agents[id.index()])
                .filter(|a| !self.members.contains(&a.id))
                .collect();
            if honest.is_empty() {
                self.active.iter().map(|id| &self.agents[id.index()]).collect()
            } else {
                honest
            }
        };
        let outcome = decide_outcome(&deciders);
        let winner = common_certificate(&deciders).map(|c| c.owner);
        let mut stats = MessageStats { rounds_elapsed: self.params.total_rounds(), ..Default::default() };
        for m in self.messages.iter().filter(|m| !m.is_local()) {
            stats.total_messages += 1;
            stats.total_bits += m.payload_bits;
            stats.max_message_bits = stats.max_message_bits.max(m.payload_bits);
        }
        Trace {
            config: self.config,
            messages: self.messages,
            transitions: self.transitions,
            agents: self.agents,
            declared: self.declared,
            verification: self.verification,
            first_declarations: self.first_declarations,
            winner,
            outcome,
            stats,
        }
    }
}

fn decide_outcome(deciders: &[&AgentState]) -> Outcome {
    let mut color = None;
    for a in deciders {
        match a.status {
            Status::Decided(c) if color.is_none() || color == Some(c) => color = Some(c),
            _ => return Outcome::Fail,
        }
    }
    color.map_or(Outcome::Fail, Outcome::Color)
}

fn common_certificate<'a>(agents: &[&'a AgentState]) -> Option<&'a Arc<Certificate>> {
    let first = agents.first()?.ce_min.as_ref()?;
    agents.iter().all(|a| a.ce_min.as_ref().is_some_and(|c| Arc::ptr_eq(c, first) || **c == **first)).then_some(first)
}
