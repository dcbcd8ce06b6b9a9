use std::collections::BTreeSet;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::adversary::CoalitionSpec;
use crate::error::ConfigError;
use crate::protocol::{AgentId, Color, Params};
use crate::rng::{global_stream, StreamLabel};

/// Everything one trial needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: Params,
    /// Initial color of agent `i + 1` at position `i`.
    pub colors: Vec<Color>,
    /// Permanently faulty agents, fixed before round 0.
    pub faulty: BTreeSet<AgentId>,
    /// Fault bound: at most `alpha * n` faulty agents.
    pub alpha: f64,
    pub coalition: Option<CoalitionSpec>,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(params: Params, colors: Vec<Color>) -> Self {
        SimConfig { params, colors, faulty: BTreeSet::new(), alpha: 1.0, coalition: None, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_faulty(mut self, faulty: impl IntoIterator<Item = AgentId>) -> Self {
        self.faulty = faulty.into_iter().collect();
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_coalition(mut self, coalition: Option<CoalitionSpec>) -> Self {
        self.coalition = coalition;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.params.n;
        if self.colors.len() != n as usize {
            return Err(ConfigError::ColorCount { got: self.colors.len(), n });
        }
        if let Some(c) = self.colors.iter().find(|c| c.0 == 0 || c.0 > self.params.sigma_size) {
            return Err(ConfigError::invalid("colors", format!("color {c} outside [1, {}]", self.params.sigma_size)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::invalid("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if let Some(a) = self.faulty.iter().find(|a| a.0 == 0 || a.0 > n) {
            return Err(ConfigError::invalid("faulty", format!("agent {a} outside [1, {n}]")));
        }
        let bound = (self.alpha * n as f64 + 1e-9).floor() as usize;
        if self.faulty.len() > bound {
            return Err(ConfigError::invalid(
                "faulty",
                format!("{} faulty agents exceed alpha * n = {bound}", self.faulty.len()),
            ));
        }
        if let Some(c) = &self.coalition {
            if let Some(a) = c.members.iter().find(|a| a.0 == 0 || a.0 > n) {
                return Err(ConfigError::invalid("coalition", format!("agent {a} outside [1, {n}]")));
            }
            if let Some(a) = c.members.intersection(&self.faulty).next() {
                return Err(ConfigError::FaultyCoalitionOverlap(a.0));
            }
        }
        Ok(())
    }

    pub fn is_faulty(&self, id: AgentId) -> bool {
        self.faulty.contains(&id)
    }

    pub fn is_member(&self, id: AgentId) -> bool {
        self.coalition.as_ref().is_some_and(|c| c.members.contains(&id))
    }

    pub fn members(&self) -> BTreeSet<AgentId> {
        self.coalition.as_ref().map(|c| c.members.clone()).unwrap_or_default()
    }

    pub fn color_of(&self, id: AgentId) -> Color {
        self.colors[id.index()]
    }

    pub fn active(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.params.agents().filter(|a| !self.is_faulty(*a))
    }
}

/// How the faulty set of a trial is chosen.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultSpec {
    #[default]
    None,
    Explicit(BTreeSet<AgentId>),
    /// `count` agents uniformly at random from the trial seed.
    Random {
        count: u32,
    },
    /// The first `count` supporters of `color`, by id.
    ColorSupporters {
        color: Color,
        count: u32,
    },
}

impl FaultSpec {
    pub fn resolve(&self, colors: &[Color], seed: u64) -> Result<BTreeSet<AgentId>, ConfigError> {
        let n = colors.len();
        Ok(match self {
            FaultSpec::None => BTreeSet::new(),
            FaultSpec::Explicit(ids) => ids.clone(),
            FaultSpec::Random { count } => {
                if *count as usize > n {
                    return Err(ConfigError::invalid("faulty", format!("{count} random faults among {n} agents")));
                }
                let mut rng = global_stream(seed, StreamLabel::Setup);
                sample(&mut rng, n, *count as usize).into_iter().map(AgentId::from_index).collect()
            }
            FaultSpec::ColorSupporters { color, count } => {
                let ids: BTreeSet<AgentId> = colors
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| *c == color)
                    .map(|(i, _)| AgentId::from_index(i))
                    .take(*count as usize)
                    .collect();
                if ids.len() < *count as usize {
                    return Err(ConfigError::invalid(
                        "faulty",
                        format!("only {} supporters of color {color}, asked for {count}", ids.len()),
                    ));
                }
                ids
            }
        })
    }
}

/// `size` members spread evenly over the active agents in id order.
pub fn spread_coalition(size: usize, n: u32, faulty: &BTreeSet<AgentId>) -> Result<BTreeSet<AgentId>, ConfigError> {
    let active: Vec<AgentId> = (1..=n).map(AgentId).filter(|a| !faulty.contains(a)).collect();
    if size > active.len() {
        return Err(ConfigError::invalid(
            "coalition",
            format!("coalition of {size} exceeds {} active agents", active.len()),
        ));
    }
    Ok((0..size).map(|i| active[i * active.len() / size]).collect())
}

/// Expands `"4x1,4x2"` (count x color) positionally; a bare number is one agent.
pub fn parse_color_shorthand(s: &str) -> Result<Vec<Color>, ConfigError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (count, color) = match part.split_once(['x', 'X']) {
            Some((c, col)) => (c.trim(), col.trim()),
            None => ("1", part),
        };
        let count: usize =
            count.parse().map_err(|_| ConfigError::invalid("colors", format!("bad count in `{part}`")))?;
        let color: u32 = color.parse().map_err(|_| ConfigError::invalid("colors", format!("bad color in `{part}`")))?;
        if color == 0 {
            return Err(ConfigError::invalid("colors", "colors start at 1"));
        }
        out.extend(std::iter::repeat_n(Color(color), count));
    }
    if out.is_empty() {
        return Err(ConfigError::invalid("colors", "empty color list"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::StrategySpec;

    fn cfg(n: u32, colors: &[u32]) -> SimConfig {
        let p = Params::derive(n, 4.0, 1.0, 2).unwrap();
        SimConfig::new(p, colors.iter().map(|&c| Color(c)).collect())
    }

    #[test]
    fn shorthand_expands() {
        let c = parse_color_shorthand("4x1,4x2").unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c[3], Color(1));
        assert_eq!(c[4], Color(2));
        assert_eq!(parse_color_shorthand("1, 2,2").unwrap(), vec![Color(1), Color(2), Color(2)]);
        assert!(parse_color_shorthand("ax1").is_err());
        assert!(parse_color_shorthand("").is_err());
    }

    #[test]
    fn overlap_rejected() {
        let c = cfg(4, &[1, 1, 2, 2])
            .with_faulty([AgentId(1)])
            .with_coalition(Some(CoalitionSpec::new([AgentId(1)], StrategySpec::named("honest"))));
        assert_eq!(c.validate().unwrap_err(), ConfigError::FaultyCoalitionOverlap(1));
    }

    #[test]
    fn color_checks() {
        assert!(matches!(cfg(4, &[1, 1, 2]).validate(), Err(ConfigError::ColorCount { got: 3, n: 4 })));
        assert_eq!(cfg(4, &[1, 1, 2, 3]).validate().unwrap_err().field(), Some("colors"));
    }

    #[test]
    fn alpha_bound() {
        let c = cfg(4, &[1, 1, 2, 2]).with_faulty([AgentId(1), AgentId(2)]).with_alpha(0.25);
        assert_eq!(c.validate().unwrap_err().field(), Some("faulty"));
        assert!(c.with_alpha(0.5).validate().is_ok());
    }

    #[test]
    fn fault_generators() {
        let colors: Vec<Color> = parse_color_shorthand("32x1,32x2").unwrap();
        let f = FaultSpec::ColorSupporters { color: Color(1), count: 16 }.resolve(&colors, 0).unwrap();
        assert_eq!(f, (1..=16).map(AgentId).collect());
        let r1 = FaultSpec::Random { count: 16 }.resolve(&colors, 9).unwrap();
        let r2 = FaultSpec::Random { count: 16 }.resolve(&colors, 9).unwrap();
        assert_eq!(r1.len(), 16);
        assert_eq!(r1, r2);
        assert_ne!(r1, FaultSpec::Random { count: 16 }.resolve(&colors, 10).unwrap());
    }

    #[test]
    fn spread_is_mixed() {
        let m = spread_coalition(4, 64, &BTreeSet::new()).unwrap();
        assert_eq!(m, [1, 17, 33, 49].into_iter().map(AgentId).collect());
        let faulty: BTreeSet<AgentId> = [AgentId(1)].into();
        assert_eq!(spread_coalition(1, 4, &faulty).unwrap(), [AgentId(2)].into());
    }
}
