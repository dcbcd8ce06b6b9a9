use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::protocol::{AgentId, Certificate, Params, Phase, VoteIntention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    PullRequest,
    IntentionReply,
    VotePush,
    CertReply,
    CertPush,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::PullRequest => "PullRequest",
            MessageKind::IntentionReply => "IntentionReply",
            MessageKind::VotePush => "VotePush",
            MessageKind::CertReply => "CertReply",
            MessageKind::CertPush => "CertPush",
        }
    }

    /// Pushes and pull requests use up the sender's operation for the round; replies do not.
    pub fn is_origination(self) -> bool {
        matches!(self, MessageKind::PullRequest | MessageKind::VotePush | MessageKind::CertPush)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    None,
    Intention(Arc<VoteIntention>),
    Vote { h: u64, j: u32 },
    Cert(Arc<Certificate>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: u32,
    pub phase: Phase,
    pub kind: MessageKind,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub payload: Payload,
    pub payload_bits: u64,
}

impl Message {
    /// Self-addressed operations never touch the network.
    pub fn is_local(&self) -> bool {
        self.sender == self.receiver
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageStats {
    /// Network messages (replies included, self-addressed excluded).
    pub total_messages: u64,
    pub max_message_bits: u64,
    pub total_bits: u64,
    pub rounds_elapsed: u32,
}

/// `ceil(log2 x)`, with `0` for `x <= 1`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// Field widths: id `ceil(log2 n)`, vote value `ceil(log2 m)`, round index
/// `ceil(log2 q)`, color `ceil(log2 |Σ|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldWidths {
    pub id: u64,
    pub value: u64,
    pub round: u64,
    pub color: u64,
}

impl FieldWidths {
    pub fn of(params: &Params) -> Self {
        FieldWidths {
            id: ceil_log2(params.n as u64),
            value: ceil_log2(params.m),
            round: ceil_log2(params.q as u64),
            color: ceil_log2(params.sigma_size as u64),
        }
    }

    pub fn certificate(&self, cert: &Certificate) -> u64 {
        self.value + self.color + self.id + cert.w.len() as u64 * (self.value + self.id + self.round)
    }

    pub fn intention(&self, h: &VoteIntention) -> u64 {
        h.len() as u64 * (self.value + self.id)
    }
}

/// Information content of a message under the field-width accounting.
/// A pull request carries one id; a vote push carries one value (the sender
/// and round are known to the receiver).
pub fn message_size_bits(kind: MessageKind, payload: &Payload, params: &Params) -> u64 {
    let w = FieldWidths::of(params);
    match (kind, payload) {
        (MessageKind::PullRequest, _) => w.id,
        (_, Payload::Intention(h)) => w.intention(h),
        (_, Payload::Vote { .. }) => w.value,
        (_, Payload::Cert(c)) => w.certificate(c),
        (_, Payload::None) => 0,
    }
}
