use thiserror::Error;

/// Errors raised while building or validating a simulation setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("color count mismatch: {got} colors for {n} agents")]
    ColorCount { got: usize, n: u32 },
    #[error("agent {0} is both faulty and a coalition member")]
    FaultyCoalitionOverlap(u32),
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field, reason: reason.into() }
    }

    /// Name of the offending field, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::UnknownStrategy(_) => Some("strategy"),
            ConfigError::ColorCount { .. } => Some("colors"),
            ConfigError::FaultyCoalitionOverlap(_) => Some("coalition"),
        }
    }
}
