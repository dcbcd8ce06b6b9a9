use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Agent label in `[1, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    /// Zero-based position, for indexing per-agent vectors.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        AgentId(i as u32 + 1)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Color in `[1, |Σ|]`. Failure is not a color; see [`crate::protocol::Outcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u32);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Protocol constants every agent derives from `n` and `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub gamma: f64,
    /// Vote modulus, `n^3`.
    pub m: u64,
    /// Rounds per networked phase.
    pub q: u32,
    pub chi: f64,
    pub sigma_size: u32,
}

impl Params {
    /// `m = n^3`, `q = max(1, ceil(gamma * ln n))`.
    pub fn derive(n: u32, gamma: f64, chi: f64, sigma_size: u32) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::invalid("n", "must be at least 1"));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(ConfigError::invalid("gamma", format!("must be a positive real, got {gamma}")));
        }
        if !chi.is_finite() || chi < 0.0 {
            return Err(ConfigError::invalid("chi", format!("must be nonnegative, got {chi}")));
        }
        if sigma_size == 0 {
            return Err(ConfigError::invalid("sigma_size", "must be at least 1"));
        }
        let m = (n as u64).checked_pow(3).ok_or_else(|| ConfigError::invalid("n", "n^3 overflows 64 bits"))?;
        let q = rounds_per_phase(n, gamma);
        Ok(Params { n, gamma, m, q, chi, sigma_size })
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + Clone {
        (1..=self.n).map(AgentId)
    }

    /// Network rounds for a complete trial: four phases of `q` rounds each.
    pub fn total_rounds(&self) -> u32 {
        4 * self.q
    }
}

/// `max(1, ceil(gamma * ln n))`.
pub fn rounds_per_phase(n: u32, gamma: f64) -> u32 {
    let raw = (gamma * (n as f64).ln()).ceil();
    if raw < 1.0 {
        1
    } else {
        raw as u32
    }
}

/// Free-function form of [`Params::derive`].
pub fn derive_params(n: u32, gamma: f64, chi: f64, sigma_size: u32) -> Result<Params, ConfigError> {
    Params::derive(n, gamma, chi, sigma_size)
}
