use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::catalog::{
    CoherenceSilence, CommitmentMismatch, FakeFaulty, HonestStrategy, KUnderbid, SilenceTargets, UnderbidMode,
};
use super::{DeviationStrategy, StrategyParams, StrategySpec};
use crate::error::ConfigError;
use crate::protocol::AgentId;

pub type StrategyFactory =
    Arc<dyn Fn(&StrategyParams) -> Result<Box<dyn DeviationStrategy>, ConfigError> + Send + Sync>;

/// Name -> constructor map. [`StrategyRegistry::default`] holds the built-ins;
/// custom strategies are added with [`StrategyRegistry::register`].
#[derive(Clone)]
pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

impl std::fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StrategyRegistry").field("names", &self.names().collect::<Vec<_>>()).finish()
    }
}

fn bool_param(params: &StrategyParams, key: &'static str, default: bool) -> Result<bool, ConfigError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.as_bool().ok_or_else(|| ConfigError::invalid(key, "expected a boolean")),
    }
}

fn str_param<'a>(params: &'a StrategyParams, key: &'static str) -> Result<Option<&'a str>, ConfigError> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v.as_str().map(Some).ok_or_else(|| ConfigError::invalid(key, "expected a string")),
    }
}

fn silence_targets(params: &StrategyParams) -> Result<SilenceTargets, ConfigError> {
    match params.get("targets") {
        None => Ok(SilenceTargets::default()),
        Some(serde_json::Value::String(s)) => match s.as_str() {
            "all" => Ok(SilenceTargets::All),
            "lower_half" => Ok(SilenceTargets::LowerHalf),
            "upper_half" => Ok(SilenceTargets::UpperHalf),
            other => Err(ConfigError::invalid("targets", format!("unknown target set `{other}`"))),
        },
        Some(serde_json::Value::Array(ids)) => ids
            .iter()
            .map(|v| {
                v.as_u64()
                    .filter(|&x| x >= 1 && x <= u32::MAX as u64)
                    .map(|x| AgentId(x as u32))
                    .ok_or_else(|| ConfigError::invalid("targets", "expected agent ids"))
            })
            .collect::<Result<BTreeSet<_>, _>>()
            .map(SilenceTargets::Explicit),
        Some(_) => Err(ConfigError::invalid("targets", "expected a name or a list of ids")),
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        let mut r = StrategyRegistry { factories: BTreeMap::new() };
        r.register("honest", |_| Ok(Box::new(HonestStrategy)));
        r.register("k_underbid", |p| {
            let mode = match str_param(p, "mode")? {
                None | Some("adjust") => UnderbidMode::Adjust,
                Some("drop_all") => UnderbidMode::DropAll,
                Some(other) => return Err(ConfigError::invalid("mode", format!("unknown underbid mode `{other}`"))),
            };
            Ok(Box::new(KUnderbid { mode }))
        });
        r.register("commitment_mismatch", |p| {
            Ok(Box::new(CommitmentMismatch {
                per_peer: bool_param(p, "per_peer", false)?,
                steer: bool_param(p, "steer", true)?,
            }))
        });
        r.register("fake_faulty", |p| {
            Ok(Box::new(FakeFaulty { silent_in_voting: bool_param(p, "silent_in_voting", false)? }))
        });
        r.register("coherence_silence", |p| Ok(Box::new(CoherenceSilence { targets: silence_targets(p)? })));
        r
    }
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { factories: BTreeMap::new() }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&StrategyParams) -> Result<Box<dyn DeviationStrategy>, ConfigError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Arc::new(factory));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &StrategySpec) -> Result<Box<dyn DeviationStrategy>, ConfigError> {
        let factory = self.factories.get(&spec.name).ok_or_else(|| ConfigError::UnknownStrategy(spec.name.clone()))?;
        factory(&spec.params)
    }
}
