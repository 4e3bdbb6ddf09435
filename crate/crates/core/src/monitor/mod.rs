//! The closed monitoring loop: step the mine, take in readings, evaluate
//! enabled policies and dispatch actuator commands, logging each trigger.

mod scenario;
mod window;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aca::{render_label, AcaError, AggregationRule, Catalog};
use crate::policy::{
    action_instances, compile_policy, evaluate_unprojected, ActuatorCommand, ActuatorKind, CompiledQuery, Policy,
    PolicyError,
};
use crate::rdf::{Binding, Graph, PrefixMap, RdfError, Term};
use crate::schema::{extract_schema, SchemaGraph};
use crate::sim::{MineWorld, SimError, WorldConfig, WorldEvent};

pub use scenario::{Scenario, ScheduledEvent};
pub use window::ObservationWindow;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Aca(#[from] AcaError),
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("policy {id}: {error}")]
    Policy { id: String, error: PolicyError },
    #[error("unknown policy {0}")]
    UnknownPolicy(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TriggerLogEntry {
    pub tick: u64,
    pub seq: u64,
    pub policy: String,
    /// Action variables, IRIs by local name.
    pub binding: BTreeMap<String, String>,
    /// The condition ACAs rendered with the triggering values.
    pub condition: String,
    pub command: ActuatorCommand,
}

/// Something that went wrong during a tick without stopping it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fault {
    pub tick: u64,
    pub policy: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TickReport {
    pub tick: u64,
    pub observations: usize,
    pub evaluations: usize,
    pub triggers: usize,
    pub faults: Vec<Fault>,
}

type CommandKey = (ActuatorKind, Option<String>);

#[derive(Clone, Debug)]
struct Installed {
    policy: Policy,
    query: CompiledQuery,
}

#[derive(Clone, Debug)]
pub struct Engine {
    config: WorldConfig,
    seed: u64,
    world: MineWorld,
    window: ObservationWindow,
    rules: Vec<AggregationRule>,
    declared: SchemaGraph,
    catalog: Catalog,
    policies: BTreeMap<String, Installed>,
    held: BTreeMap<String, BTreeSet<CommandKey>>,
    scheduled: Vec<ScheduledEvent>,
    log: Vec<TriggerLogEntry>,
    faults: Vec<Fault>,
}

/// ACAs for everything the world can observe or actuate, plus whatever
/// `declared` adds.
pub fn build_catalog(world: &MineWorld, declared: &SchemaGraph, rules: &[AggregationRule], names: Graph) -> Catalog {
    let schema = extract_schema(&world.capability_graph()).union(declared);
    Catalog::build(rules, &schema, names, PrefixMap::with_defaults(world.base()))
}

impl Engine {
    pub fn new(config: WorldConfig, seed: u64, rules: Vec<AggregationRule>, names: Graph) -> Result<Self, EngineError> {
        let world = MineWorld::new(&config, seed)?;
        let declared = SchemaGraph::empty();
        let catalog = build_catalog(&world, &declared, &rules, names);
        Ok(Engine {
            declared,
            window: ObservationWindow::new(world.static_graph()),
            config,
            seed,
            world,
            rules,
            catalog,
            policies: BTreeMap::new(),
            held: BTreeMap::new(),
            scheduled: Vec::new(),
            log: Vec::new(),
            faults: Vec::new(),
        })
    }

    /// Shipped mine, rules and names.
    pub fn with_defaults(seed: u64) -> Result<Self, EngineError> {
        Scenario::default().build(Some(seed))
    }

    pub fn world(&self) -> &MineWorld {
        &self.world
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn log(&self) -> &[TriggerLogEntry] {
        &self.log
    }

    pub fn faults(&self) -> &[Fault] {
        &self.faults
    }

    pub fn scheduled(&self) -> &[ScheduledEvent] {
        &self.scheduled
    }

    pub fn policies(&self) -> impl Iterator<Item = &Policy> {
        self.policies.values().map(|i| &i.policy)
    }

    pub fn policy(&self, id: &str) -> Option<&Policy> {
        self.policies.get(id).map(|i| &i.policy)
    }

    pub fn compiled(&self, id: &str) -> Option<&CompiledQuery> {
        self.policies.get(id).map(|i| &i.query)
    }

    /// Validate, compile and install; replaces any policy with the same id.
    pub fn upsert_policy(&mut self, policy: Policy) -> Result<&CompiledQuery, EngineError> {
        let query = compile_policy(&policy, &self.catalog).map_err(|error| EngineError::Policy {
            id: policy.id.clone(),
            error,
        })?;
        let id = policy.id.clone();
        self.held.remove(&id);
        self.policies.insert(id.clone(), Installed { policy, query });
        Ok(&self.policies[&id].query)
    }

    pub fn remove_policy(&mut self, id: &str) -> Result<Policy, EngineError> {
        self.held.remove(id);
        self.policies
            .remove(id)
            .map(|i| i.policy)
            .ok_or_else(|| EngineError::UnknownPolicy(id.to_string()))
    }

    /// Swap the rule set. Every installed policy must still compile against
    /// the new catalog, otherwise nothing changes.
    pub fn set_rules(&mut self, rules: Vec<AggregationRule>) -> Result<(), EngineError> {
        self.rebuild(rules, self.declared.clone())
    }

    /// Extra schema triples to offer ACAs for, beyond what the mine itself
    /// produces. Same all-or-nothing rule as [`Engine::set_rules`].
    pub fn set_declared_schema(&mut self, declared: SchemaGraph) -> Result<(), EngineError> {
        self.rebuild(self.rules.clone(), declared)
    }

    pub fn rules(&self) -> &[AggregationRule] {
        &self.rules
    }

    fn rebuild(&mut self, rules: Vec<AggregationRule>, declared: SchemaGraph) -> Result<(), EngineError> {
        let catalog = build_catalog(&self.world, &declared, &rules, self.catalog.names().clone());
        let mut recompiled = BTreeMap::new();
        for (id, installed) in &self.policies {
            let query = compile_policy(&installed.policy, &catalog)
                .map_err(|error| EngineError::Policy { id: id.clone(), error })?;
            recompiled.insert(
                id.clone(),
                Installed {
                    policy: installed.policy.clone(),
                    query,
                },
            );
        }
        self.rules = rules;
        self.declared = declared;
        self.catalog = catalog;
        self.policies = recompiled;
        Ok(())
    }

    pub fn inject_event(&mut self, event: WorldEvent) -> Result<(), EngineError> {
        Ok(self.world.inject_event(event)?)
    }

    /// Inject `event` once the world reaches tick `at`.
    pub fn schedule_event(&mut self, at: u64, event: WorldEvent) {
        self.scheduled.push(ScheduledEvent { at, event });
    }

    /// Back to tick 0, keeping policies and rules. Log and faults are cleared.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<(), EngineError> {
        let seed = seed.unwrap_or(self.seed);
        let world = MineWorld::new(&self.config, seed)?;
        self.window = ObservationWindow::new(world.static_graph());
        self.world = world;
        self.seed = seed;
        self.held.clear();
        self.log.clear();
        self.faults.clear();
        Ok(())
    }

    pub fn tick(&mut self) -> TickReport {
        let mut report = TickReport::default();

        let now = self.world.tick();
        let due: Vec<WorldEvent> = self
            .scheduled
            .iter()
            .filter(|s| s.at == now)
            .map(|s| s.event.clone())
            .collect();
        for event in due {
            if let Err(e) = self.world.inject_event(event) {
                report.faults.push(Fault {
                    tick: now,
                    policy: None,
                    message: e.to_string(),
                });
            }
        }

        self.world.step();
        let tick = self.world.tick();
        report.tick = tick;

        let samples = self.world.sample_observations();
        report.observations = samples.len();
        self.window.merge_samples(&samples, self.world.base());
        let graph = self.window.as_graph();

        for (id, installed) in &self.policies {
            if !installed.policy.enabled {
                self.held.remove(id);
                continue;
            }
            report.evaluations += 1;
            let results = match evaluate_unprojected(&installed.query, &graph) {
                Ok(r) => r,
                Err(e) => {
                    report.faults.push(Fault {
                        tick,
                        policy: Some(id.clone()),
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            let commands = action_instances(&installed.policy, &installed.query, &results, tick);
            let current: BTreeSet<CommandKey> = commands.iter().map(|c| (c.kind, c.target.clone())).collect();
            let previous = self.held.insert(id.clone(), current).unwrap_or_default();

            for command in commands {
                let key = (command.kind, command.target.clone());
                if previous.contains(&key) {
                    continue;
                }
                let witness = results
                    .iter()
                    .find(|b| target_of(&installed.query, b) == command.target)
                    .expect("every command comes from a result");
                if let Err(e) = self.world.apply_actuator(&command) {
                    if let Some(held) = self.held.get_mut(id) {
                        held.remove(&key);
                    }
                    report.faults.push(Fault {
                        tick,
                        policy: Some(id.clone()),
                        message: e.to_string(),
                    });
                    continue;
                }
                let seq = self.log.len() as u64;
                self.log.push(TriggerLogEntry {
                    tick,
                    seq,
                    policy: id.clone(),
                    binding: installed
                        .query
                        .projection
                        .iter()
                        .filter_map(|v| witness.get(v).map(|t| (v.name().to_string(), display_term(t))))
                        .collect(),
                    condition: self.describe(&installed.query, witness),
                    command,
                });
                report.triggers += 1;
            }
        }

        self.faults.extend(report.faults.iter().cloned());
        report
    }

    /// `n` ticks; returns the whole log.
    pub fn run(&mut self, n: u64) -> &[TriggerLogEntry] {
        for _ in 0..n {
            self.tick();
        }
        &self.log
    }

    /// Entries logged at tick `since` or later.
    pub fn log_since(&self, since: u64) -> &[TriggerLogEntry] {
        let start = self.log.partition_point(|e| e.tick < since);
        &self.log[start..]
    }

    /// [`Engine::log_since`], one JSON object per line.
    pub fn log_json_lines(&self, since: u64) -> String {
        let mut out = String::new();
        for entry in self.log_since(since) {
            out.push_str(&serde_json::to_string(entry).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }

    fn describe(&self, query: &CompiledQuery, binding: &Binding) -> String {
        let parts: Vec<String> = query
            .conditions
            .iter()
            .filter_map(|c| {
                let aca = self.catalog.get(&c.aca)?;
                let local: Binding = c
                    .vars
                    .iter()
                    .filter_map(|(exposed, policy_var)| Some((exposed.clone(), binding.get(policy_var)?.clone())))
                    .collect();
                render_label(aca, Some(&local), self.catalog.names()).ok()
            })
            .collect();
        parts.join(" and ")
    }
}

fn target_of(query: &CompiledQuery, binding: &Binding) -> Option<String> {
    if !query.action.kind.is_targeted() {
        return None;
    }
    binding.get(query.action.target.as_ref()?).map(display_term)
}

fn display_term(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.local_name().to_string(),
        Term::Literal(lit) => lit.lexical().to_string(),
        Term::Variable(v) => v.to_string(),
    }
}
