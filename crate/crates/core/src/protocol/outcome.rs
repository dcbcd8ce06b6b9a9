use std::fmt;

use serde::{Deserialize, Serialize};

use super::params::Color;

/// Final state of a run: a winning color, or failure (⊥).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Color(Color),
    Fail,
}

impl Outcome {
    pub fn color(self) -> Option<Color> {
        match self {
            Outcome::Color(c) => Some(c),
            Outcome::Fail => None,
        }
    }

    pub fn is_fail(self) -> bool {
        matches!(self, Outcome::Fail)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Color(c) => write!(f, "{c}"),
            Outcome::Fail => f.write_str("fail"),
        }
    }
}

/// Payoff: 1 for the agent's own color, `-chi` on failure, 0 otherwise.
pub fn utility(outcome: Outcome, my_color: Color, chi: f64) -> f64 {
    match outcome {
        Outcome::Color(c) if c == my_color => 1.0,
        Outcome::Color(_) => 0.0,
        Outcome::Fail => -chi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_scheme() {
        assert_eq!(utility(Outcome::Color(Color(1)), Color(1), 1.0), 1.0);
        assert_eq!(utility(Outcome::Color(Color(2)), Color(1), 1.0), 0.0);
        assert_eq!(utility(Outcome::Fail, Color(1), 2.0), -2.0);
        assert_eq!(utility(Outcome::Fail, Color(1), 0.0), 0.0);
    }
}
