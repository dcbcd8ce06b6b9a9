//! Rational fair consensus in the synchronous GOSSIP model.
//!
//! Agents on a complete graph each support a color; the protocol elects one
//! active agent uniformly at random and everyone adopts its color. The
//! election is a randomized sum of committed votes, audited so that a
//! coalition of rational agents cannot tilt it without being caught.
//!
//! - [`protocol`]: per-agent data and pure phase operations.
//! - [`sim`]: synchronous push/pull scheduler, traces, good-execution flags.
//! - [`adversary`]: coalition hooks and built-in attacks.
//! - [`analysis`]: Monte Carlo experiments and trace oracles.
//! - [`cli`]: config parsing and subcommands behind the `fair-gossip` binary.

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod protocol;
pub mod rng;
pub mod sim;

pub use error::ConfigError;
