use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{Attachment, Constants, SensorConfig, SensorKind, WorldConfig};
use super::SimError;
use crate::policy::{ActuatorCommand, ActuatorKind};
use crate::rdf::vocab::{RDF_TYPE, SOSA_HAS_FEATURE_OF_INTEREST, SOSA_HAS_RESULT, SOSA_OBSERVED_PROPERTY};
use crate::rdf::{Graph, Iri, Literal, Term, Triple};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunnelState {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub exit: bool,
    /// ppm
    pub co: f64,
    /// °C
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkerStatus {
    Working,
    Evacuating,
    Surfaced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: String,
    pub tunnel: String,
    pub status: WorkerStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum EventKind {
    /// ppm per tick
    GasLeak { rate: f64 },
    /// °C and ppm per tick
    Fire { heat: f64, co_rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    pub tunnel: String,
    /// Set on injection.
    #[serde(default)]
    pub start: u64,
    pub duration: u64,
}

impl WorldEvent {
    pub fn gas_leak(tunnel: impl Into<String>, rate: f64, duration: u64) -> Self {
        WorldEvent {
            kind: EventKind::GasLeak { rate },
            tunnel: tunnel.into(),
            start: 0,
            duration,
        }
    }

    pub fn fire(tunnel: impl Into<String>, heat: f64, co_rate: f64, duration: u64) -> Self {
        WorldEvent {
            kind: EventKind::Fire { heat, co_rate },
            tunnel: tunnel.into(),
            start: 0,
            duration,
        }
    }

    pub fn is_active(&self, tick: u64) -> bool {
        self.start <= tick && tick < self.start.saturating_add(self.duration)
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.duration == 0 {
            return Err(SimError::InvalidEvent("duration must be at least 1".into()));
        }
        let rates: &[f64] = match &self.kind {
            EventKind::GasLeak { rate } => &[*rate],
            EventKind::Fire { heat, co_rate } => &[*heat, *co_rate],
        };
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SimError::InvalidEvent("rates must be finite and non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleValue {
    Number(f64),
    /// Location readings: the tunnel a worker is in.
    Tunnel(String),
}

/// One sensor reading, before it becomes triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sensor: String,
    pub kind: SensorKind,
    /// Feature of interest.
    pub tunnel: String,
    pub value: SampleValue,
    pub tick: u64,
}

impl Sample {
    /// The four-triple observation shape, IRIs minted under `base`.
    pub fn triples(&self, base: &str) -> Vec<Triple> {
        let iri = |local: &str| Term::Iri(Iri::new(format!("{base}{local}")).expect("valid local name"));
        let fixed = |s: &str| Term::Iri(Iri::new(s).expect("vocabulary IRI"));
        let obs = iri(&format!("obs-{}-{}", self.sensor, self.tick));
        let feature = iri(&self.tunnel);
        let result = match &self.value {
            SampleValue::Number(v) => Term::Literal(Literal::number(*v).expect("finite reading")),
            SampleValue::Tunnel(t) => iri(t),
        };
        vec![
            Triple::new(obs.clone(), fixed(SOSA_OBSERVED_PROPERTY), iri(self.kind.property())),
            Triple::new(obs.clone(), fixed(SOSA_HAS_RESULT), result),
            Triple::new(obs, fixed(SOSA_HAS_FEATURE_OF_INTEREST), feature.clone()),
            Triple::new(feature, fixed(RDF_TYPE), iri("Tunnel")),
        ]
    }
}

/// Read-only view for clients; leaves out sensors and generator state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorldSnapshot {
    pub tick: u64,
    pub tunnels: Vec<TunnelState>,
    pub workers: Vec<Worker>,
    pub events: Vec<WorldEvent>,
    pub geofenced: BTreeSet<String>,
    pub mine_evacuation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MineWorld {
    base: String,
    constants: Constants,
    tunnels: Vec<TunnelState>,
    workers: Vec<Worker>,
    sensors: Vec<SensorConfig>,
    events: Vec<WorldEvent>,
    geofenced: BTreeSet<String>,
    mine_evacuation: bool,
    tick: u64,
    rng: ChaCha8Rng,
}

impl MineWorld {
    pub fn new(config: &WorldConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        let c = &config.constants;
        let tunnels = config
            .tunnels
            .iter()
            .map(|t| TunnelState {
                id: t.id.clone(),
                from: t.from.clone(),
                to: t.to.clone(),
                length: t.length,
                exit: t.exit,
                co: config.initial_co.get(&t.id).copied().unwrap_or(c.ambient_co),
                temperature: c.ambient_temp,
            })
            .collect();
        let workers = config
            .workers
            .iter()
            .map(|w| Worker {
                id: w.id.clone(),
                tunnel: w.tunnel.clone(),
                status: WorkerStatus::Working,
            })
            .collect();
        Ok(MineWorld {
            base: config.base.clone(),
            constants: c.clone(),
            tunnels,
            workers,
            sensors: config.sensors.clone(),
            events: Vec::new(),
            geofenced: BTreeSet::new(),
            mine_evacuation: false,
            tick: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn tunnels(&self) -> &[TunnelState] {
        &self.tunnels
    }

    pub fn tunnel(&self, id: &str) -> Option<&TunnelState> {
        self.tunnel_index(id).ok().map(|i| &self.tunnels[i])
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn sensors(&self) -> &[SensorConfig] {
        &self.sensors
    }

    pub fn events(&self) -> &[WorldEvent] {
        &self.events
    }

    pub fn geofenced(&self) -> &BTreeSet<String> {
        &self.geofenced
    }

    pub fn mine_evacuation(&self) -> bool {
        self.mine_evacuation
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            tick: self.tick,
            tunnels: self.tunnels.clone(),
            workers: self.workers.clone(),
            events: self.events.clone(),
            geofenced: self.geofenced.clone(),
            mine_evacuation: self.mine_evacuation,
        }
    }

    /// Accepts `t3`, `:t3` or the full IRI.
    fn tunnel_index(&self, reference: &str) -> Result<usize, SimError> {
        let id = reference
            .strip_prefix(self.base.as_str())
            .or_else(|| reference.strip_prefix(':'))
            .unwrap_or(reference);
        self.tunnels
            .iter()
            .position(|t| t.id == id)
            .ok_or_else(|| SimError::UnknownTunnel(reference.to_string()))
    }

    /// Tunnels sharing an endpoint, by index, ascending.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let touches =
            |a: &TunnelState, b: &TunnelState| a.from == b.from || a.from == b.to || a.to == b.from || a.to == b.to;
        self.tunnels
            .iter()
            .enumerate()
            .map(|(i, a)| {
                (0..self.tunnels.len())
                    .filter(|&j| j != i && touches(a, &self.tunnels[j]))
                    .collect()
            })
            .collect()
    }

    pub fn neighbours(&self, tunnel: &str) -> Result<Vec<&str>, SimError> {
        let i = self.tunnel_index(tunnel)?;
        Ok(self.adjacency()[i]
            .iter()
            .map(|&j| self.tunnels[j].id.as_str())
            .collect())
    }

    /// Append an event starting now.
    pub fn inject_event(&mut self, mut event: WorldEvent) -> Result<(), SimError> {
        let index = self.tunnel_index(&event.tunnel)?;
        event.validate()?;
        event.tunnel = self.tunnels[index].id.clone();
        event.start = self.tick;
        self.events.push(event);
        Ok(())
    }

    pub fn apply_actuator(&mut self, command: &ActuatorCommand) -> Result<(), SimError> {
        let target = match (command.kind.is_targeted(), &command.target) {
            (true, Some(t)) => Some(self.tunnels[self.tunnel_index(t)?].id.clone()),
            (true, None) => return Err(SimError::MissingTarget(command.kind)),
            (false, _) => None,
        };
        match (command.kind, target) {
            (ActuatorKind::EvacuateTunnel, Some(t)) => self.evacuate_where(|w| w.tunnel == t),
            (ActuatorKind::GeofenceTunnel, Some(t)) => {
                self.evacuate_where(|w| w.tunnel == t);
                self.geofenced.insert(t);
            }
            (ActuatorKind::EvacuateMine, _) => {
                self.mine_evacuation = true;
                self.evacuate_where(|_| true);
            }
            _ => unreachable!("targeted kinds resolved above"),
        }
        Ok(())
    }

    fn evacuate_where(&mut self, pred: impl Fn(&Worker) -> bool) {
        for w in &mut self.workers {
            if w.status == WorkerStatus::Working && pred(w) {
                w.status = WorkerStatus::Evacuating;
            }
        }
    }

    /// Advance one tick.
    pub fn step(&mut self) {
        let adj = self.adjacency();
        let tick = self.tick;
        let c = self.constants.clone();

        for event in &self.events {
            if !event.is_active(tick) {
                continue;
            }
            let i = self.tunnel_index(&event.tunnel).expect("checked on injection");
            let t = &mut self.tunnels[i];
            match event.kind {
                EventKind::GasLeak { rate } => t.co += rate,
                EventKind::Fire { heat, co_rate } => {
                    t.temperature += heat;
                    t.co += co_rate;
                }
            }
        }

        let co: Vec<f64> = self.tunnels.iter().map(|t| t.co).collect();
        let temp: Vec<f64> = self.tunnels.iter().map(|t| t.temperature).collect();
        let relax = |values: &[f64], i: usize, ambient: f64| {
            let mut v = values[i];
            if !adj[i].is_empty() {
                let mean = adj[i].iter().map(|&j| values[j]).sum::<f64>() / adj[i].len() as f64;
                v += c.diffusion * (mean - v);
            }
            v - c.decay * (v - ambient)
        };
        for i in 0..self.tunnels.len() {
            self.tunnels[i].co = relax(&co, i, c.ambient_co).max(0.0);
            self.tunnels[i].temperature = relax(&temp, i, c.ambient_temp).max(c.ambient_temp);
        }

        for k in 0..self.workers.len() {
            let here = self
                .tunnel_index(&self.workers[k].tunnel)
                .expect("workers stay on the map");
            match self.workers[k].status {
                WorkerStatus::Working => {
                    let roll: f64 = self.rng.random();
                    if roll < c.move_probability {
                        let open: Vec<usize> = adj[here]
                            .iter()
                            .copied()
                            .filter(|&j| !self.geofenced.contains(&self.tunnels[j].id))
                            .collect();
                        if !open.is_empty() {
                            let j = open[self.rng.random_range(0..open.len())];
                            self.workers[k].tunnel = self.tunnels[j].id.clone();
                        }
                    }
                }
                WorkerStatus::Evacuating => {
                    if self.tunnels[here].exit {
                        self.workers[k].status = WorkerStatus::Surfaced;
                    } else if let Some(next) = self.next_hop(&adj, here) {
                        self.workers[k].tunnel = self.tunnels[next].id.clone();
                        if self.tunnels[next].exit {
                            self.workers[k].status = WorkerStatus::Surfaced;
                        }
                    }
                }
                WorkerStatus::Surfaced => {}
            }
        }

        if self.mine_evacuation {
            self.evacuate_where(|_| true);
        }

        self.tick += 1;
        let now = self.tick;
        self.events.retain(|e| now < e.start.saturating_add(e.duration));
    }

    /// First tunnel on a shortest path to an exit, avoiding geofenced
    /// tunnels when any exit can be reached that way.
    fn next_hop(&self, adj: &[Vec<usize>], from: usize) -> Option<usize> {
        let fenced: Vec<bool> = self.tunnels.iter().map(|t| self.geofenced.contains(&t.id)).collect();
        self.bfs_first_step(adj, from, &fenced)
            .or_else(|| self.bfs_first_step(adj, from, &vec![false; fenced.len()]))
    }

    fn bfs_first_step(&self, adj: &[Vec<usize>], from: usize, blocked: &[bool]) -> Option<usize> {
        let mut first = vec![None; self.tunnels.len()];
        let mut seen = vec![false; self.tunnels.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if seen[j] || blocked[j] {
                    continue;
                }
                seen[j] = true;
                first[j] = if i == from { Some(j) } else { first[i] };
                if self.tunnels[j].exit {
                    return first[j];
                }
                queue.push_back(j);
            }
        }
        None
    }

    fn read(&mut self, sensor: &SensorConfig, noisy: bool) -> Option<Sample> {
        let (tunnel, value) = match (&sensor.attachment, sensor.kind) {
            (Attachment::Worker(id), _) => {
                let w = self.workers.iter().find(|w| &w.id == id)?;
                if w.status == WorkerStatus::Surfaced {
                    return None;
                }
                (w.tunnel.clone(), SampleValue::Tunnel(w.tunnel.clone()))
            }
            (Attachment::Tunnel(id), kind) => {
                let t = &self.tunnels[self.tunnel_index(id).ok()?];
                let truth = if kind == SensorKind::Temperature {
                    t.temperature
                } else {
                    t.co
                };
                let tunnel = t.id.clone();
                let sigma = sensor.noise.unwrap_or(self.constants.sensor_noise);
                let noise = if noisy && sigma > 0.0 {
                    Normal::new(0.0, sigma).expect("σ checked").sample(&mut self.rng)
                } else {
                    0.0
                };
                let reading = ((truth + noise).max(0.0) * 100.0).round() / 100.0;
                (tunnel, SampleValue::Number(reading))
            }
        };
        Some(Sample {
            sensor: sensor.id.clone(),
            kind: sensor.kind,
            tunnel,
            value,
            tick: self.tick,
        })
    }

    /// Readings of every sensor due at the current tick, in sensor order.
    pub fn sample_observations(&mut self) -> Vec<Sample> {
        let sensors = self.sensors.clone();
        let tick = self.tick;
        sensors
            .iter()
            .filter(|s| tick.is_multiple_of(s.period))
            .filter_map(|s| self.read(s, true))
            .collect()
    }

    pub fn emit_observations(&mut self) -> Graph {
        let base = self.base.clone();
        self.sample_observations()
            .iter()
            .flat_map(|s| s.triples(&base))
            .collect()
    }

    fn iri(&self, local: &str) -> Term {
        Term::Iri(Iri::new(format!("{}{local}", self.base)).expect("valid local name"))
    }

    /// Type triples for every tunnel.
    pub fn static_graph(&self) -> Graph {
        let rdf_type = Term::Iri(Iri::new(RDF_TYPE).expect("vocabulary IRI"));
        self.tunnels
            .iter()
            .map(|t| Triple::new(self.iri(&t.id), rdf_type.clone(), self.iri("Tunnel")))
            .collect()
    }

    /// What this mine can observe and actuate: one noise-free reading per
    /// sensor plus a declaration per actuator. Schema extraction input.
    pub fn capability_graph(&self) -> Graph {
        let mut graph = self.static_graph();
        let mut scratch = self.clone();
        let base = self.base.clone();
        for sensor in &self.sensors {
            if let Some(sample) = scratch.read(sensor, false) {
                for t in sample.triples(&base) {
                    graph.insert(t).expect("ground");
                }
            }
        }
        let rdf_type = Term::Iri(Iri::new(RDF_TYPE).expect("vocabulary IRI"));
        let targets = self.iri("targets");
        let mut declare = |actuator: String, class: &str, target: Term| {
            let a = self.iri(&actuator);
            graph
                .insert(Triple::new(a.clone(), rdf_type.clone(), self.iri(class)))
                .expect("ground");
            graph.insert(Triple::new(a, targets.clone(), target)).expect("ground");
        };
        for t in &self.tunnels {
            declare(format!("evacuate-{}", t.id), "EvacuateTunnel", self.iri(&t.id));
            declare(format!("geofence-{}", t.id), "GeofenceTunnel", self.iri(&t.id));
        }
        declare("evacuate-mine".into(), "EvacuateMine", self.iri("mine"));
        graph
            .insert(Triple::new(self.iri("mine"), rdf_type, self.iri("Mine")))
            .expect("ground");
        graph
    }
}
