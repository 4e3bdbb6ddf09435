use serde::{Deserialize, Serialize};

use super::{Engine, EngineError};
use crate::aca::parse_rule_file;
use crate::defaults;
use crate::policy::Policy;
use crate::rdf::{parse_turtle, PrefixMap};
use crate::sim::{ConstantsPatch, WorldConfig, WorldEvent};

/// An event injected when the world reaches tick `at`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub at: u64,
    #[serde(flatten)]
    pub event: WorldEvent,
}

/// A headless run: world, vocabulary, policies and scripted events.
/// Omitted parts fall back to the shipped defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub world: Option<WorldConfig>,
    #[serde(default)]
    pub constants: ConstantsPatch,
    /// A rule file document.
    #[serde(default)]
    pub rules: Option<serde_json::Value>,
    /// Turtle with display names.
    #[serde(default)]
    pub ontology: Option<String>,
    #[serde(default)]
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub events: Vec<ScheduledEvent>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Scenario(e.to_string()))
    }

    pub fn world_config(&self) -> WorldConfig {
        let mut config = self.world.clone().unwrap_or_else(WorldConfig::default_mine);
        config.constants.apply(&self.constants);
        config
    }

    /// Build the engine; `seed` overrides the scenario's own.
    pub fn build(&self, seed: Option<u64>) -> Result<Engine, EngineError> {
        let config = self.world_config();
        let prefixes = PrefixMap::with_defaults(&config.base);
        let rules = match &self.rules {
            Some(doc) => parse_rule_file(&doc.to_string(), &prefixes)?,
            None => defaults::rules(&prefixes)?,
        };
        let names = match &self.ontology {
            Some(text) => parse_turtle(text, &prefixes)?,
            None => defaults::ontology(&prefixes)?,
        };
        let mut engine = Engine::new(config, seed.unwrap_or(self.seed), rules, names)?;
        for p in &self.policies {
            engine.upsert_policy(p.clone())?;
        }
        for e in &self.events {
            engine.schedule_event(e.at, e.event.clone());
        }
        Ok(engine)
    }
}
