use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ledger::{Ledger, VoterRecord};
use super::params::{AgentId, Color, Params};
use super::tally::{compute_k, Tally};

/// `(k, W, c, id)`: the claim an agent circulates in Find-Min and Coherence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub k: u64,
    pub w: Tally,
    pub color: Color,
    pub owner: AgentId,
}

impl Certificate {
    /// The certificate an honest agent builds from its own tally.
    pub fn honest(tally: Tally, color: Color, owner: AgentId, m: u64) -> Self {
        let k = compute_k(&tally, m);
        Certificate { k, w: tally, color, owner }
    }

    /// Canonical byte form: `k`, `|W|`, `W` sorted by `(sender, j)`, color, owner.
    /// Two certificates are equal exactly when these bytes are equal.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 16 * self.w.len());
        out.extend_from_slice(&self.k.to_le_bytes());
        out.extend_from_slice(&(self.w.len() as u32).to_le_bytes());
        for v in self.w.votes() {
            out.extend_from_slice(&v.sender.0.to_le_bytes());
            out.extend_from_slice(&v.j.to_le_bytes());
            out.extend_from_slice(&v.h.to_le_bytes());
        }
        out.extend_from_slice(&self.color.0.to_le_bytes());
        out.extend_from_slice(&self.owner.0.to_le_bytes());
        out
    }
}

/// Find-Min step: `b` replaces the incumbent `a` only on a strictly smaller `k`.
pub fn min_certificate<'a>(a: &'a Certificate, b: &'a Certificate) -> &'a Certificate {
    match b.k.cmp(&a.k) {
        Ordering::Less => b,
        _ => a,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailReason {
    /// `k` is not the sum of `W` mod `m`.
    BadChecksum,
    /// A vote in `W` differs from the auditor's ledger (other value or other target).
    VoteMismatch { sender: AgentId, j: u32 },
    /// A vote in `W` claims a nonzero value from a voter the auditor marked faulty.
    FaultyVote { sender: AgentId, j: u32 },
    /// The auditor's ledger shows a vote for the owner that `W` omits.
    MissingVote { sender: AgentId, j: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyResult {
    Accept(Color),
    Fail(FailReason),
}

impl VerifyResult {
    pub fn is_accept(&self) -> bool {
        matches!(self, VerifyResult::Accept(_))
    }
}

/// Audits a certificate against the auditor's Commitment ledger.
///
/// Checks, in order: the checksum `k = sum(W) mod m`; every vote in `W` whose
/// sender the ledger covers must carry the declared value and target the
/// owner (zero for a faulty mark); every declared vote for the owner that the
/// ledger holds must appear in `W`. Votes from voters the ledger never saw
/// are not checked.
pub fn verify_certificate(cert: &Certificate, ledger: &Ledger, params: &Params) -> VerifyResult {
    if cert.k != compute_k(&cert.w, params.m) {
        return VerifyResult::Fail(FailReason::BadChecksum);
    }
    for v in cert.w.votes() {
        match ledger.record(v.sender) {
            None => {}
            Some(VoterRecord::FaultyMark) => {
                if v.h != 0 {
                    return VerifyResult::Fail(FailReason::FaultyVote { sender: v.sender, j: v.j });
                }
            }
            Some(VoterRecord::Declared(h)) => match h.get(v.j) {
                Some(d) if d.z == cert.owner && d.h == v.h => {}
                _ => return VerifyResult::Fail(FailReason::VoteMismatch { sender: v.sender, j: v.j }),
            },
        }
    }
    for (voter, record) in ledger.voters() {
        if let VoterRecord::Declared(h) = record {
            for d in h.votes().iter().filter(|d| d.z == cert.owner) {
                if cert.w.get(voter, d.j).is_none() {
                    return VerifyResult::Fail(FailReason::MissingVote { sender: voter, j: d.j });
                }
            }
        }
    }
    VerifyResult::Accept(cert.color)
}
