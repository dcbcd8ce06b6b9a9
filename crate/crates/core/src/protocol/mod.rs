//! Per-agent protocol logic for the six phases: data types and the pure
//! operations an agent applies to them. Scheduling lives in [`crate::sim`].

mod agent;
mod certificate;
mod ledger;
mod outcome;
mod params;
mod tally;
mod vote;

pub use agent::{AgentState, Phase, Status};
pub use certificate::{min_certificate, verify_certificate, Certificate, FailReason, VerifyResult};
pub use ledger::{record_commitment, CommitmentReply, Ledger, LedgerEntry, VoterRecord};
pub use outcome::{utility, Outcome};
pub use params::{derive_params, rounds_per_phase, AgentId, Color, Params};
pub use tally::{compute_k, ReceivedVote, Tally};
pub use vote::{add_mod, draw_vote_intention, Vote, VoteIntention};
