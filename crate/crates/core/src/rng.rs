//! Per-agent deterministic random streams.
//!
//! Every agent draws from its own ChaCha8 stream keyed by
//! `(master seed, agent id, stream label)`. An honest agent therefore makes
//! the same choices in a baseline run and in a deviation run with the same
//! seed, whatever the coalition does.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::protocol::AgentId;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    VotingIntention,
    Commitment,
    FindMin,
    Coherence,
    /// Private randomness of a deviation strategy.
    Strategy,
    /// Fault-set and coalition generators.
    Setup,
}

impl StreamLabel {
    fn tag(self) -> u32 {
        match self {
            StreamLabel::VotingIntention => 1,
            StreamLabel::Commitment => 2,
            StreamLabel::FindMin => 3,
            StreamLabel::Coherence => 4,
            StreamLabel::Strategy => 5,
            StreamLabel::Setup => 6,
        }
    }
}

/// Stream for `agent` under `label`. Distinct keys give independent streams.
pub fn agent_stream(seed: u64, agent: AgentId, label: StreamLabel) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&agent.0.to_le_bytes());
    key[12..16].copy_from_slice(&label.tag().to_le_bytes());
    key[16..24].copy_from_slice(b"fgossip1");
    ChaCha8Rng::from_seed(key)
}

/// Stream not tied to any agent (agent label 0).
pub fn global_stream(seed: u64, label: StreamLabel) -> StreamRng {
    agent_stream(seed, AgentId(0), label)
}

/// Uniform agent in `[1, n]`, self included.
#[inline]
pub fn uniform_agent<R: Rng + ?Sized>(rng: &mut R, n: u32) -> AgentId {
    AgentId(rng.gen_range(1..=n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = agent_stream(7, AgentId(3), StreamLabel::Commitment)
            .sample_iter(rand::distributions::Standard)
            .take(8)
            .collect();
        let b: Vec<u64> = agent_stream(7, AgentId(3), StreamLabel::Commitment)
            .sample_iter(rand::distributions::Standard)
            .take(8)
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn keys_separate_streams() {
        let draw = |s, a, l| agent_stream(s, AgentId(a), l).gen::<u64>();
        let base = draw(7, 3, StreamLabel::Commitment);
        assert_ne!(base, draw(8, 3, StreamLabel::Commitment));
        assert_ne!(base, draw(7, 4, StreamLabel::Commitment));
        assert_ne!(base, draw(7, 3, StreamLabel::FindMin));
    }

    #[test]
    fn uniform_agent_in_range() {
        let mut rng = agent_stream(1, AgentId(1), StreamLabel::Commitment);
        for _ in 0..1000 {
            let a = uniform_agent(&mut rng, 5);
            assert!((1..=5).contains(&a.0));
        }
    }
}
