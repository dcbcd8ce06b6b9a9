#![allow(dead_code)]

use std::collections::BTreeSet;

use fair_gossip::adversary::{CoalitionSpec, StrategySpec};
use fair_gossip::protocol::{AgentId, Color, Params};
use fair_gossip::sim::{parse_color_shorthand, SimConfig};

pub fn params(n: u32) -> Params {
    Params::derive(n, 4.0, 1.0, 2).unwrap()
}

pub fn config(n: u32, colors: &str) -> SimConfig {
    SimConfig::new(params(n), parse_color_shorthand(colors).unwrap())
}

/// Half color 1, half color 2.
pub fn split(n: u32) -> SimConfig {
    let colors = (1..=n).map(|i| Color(if i <= n.div_ceil(2) { 1 } else { 2 })).collect();
    SimConfig::new(params(n), colors)
}

pub fn ids(xs: &[u32]) -> BTreeSet<AgentId> {
    xs.iter().map(|&x| AgentId(x)).collect()
}

pub fn with_coalition(cfg: SimConfig, members: &[u32], strategy: StrategySpec) -> SimConfig {
    cfg.with_coalition(Some(CoalitionSpec::new(ids(members), strategy)))
}
