use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::rdf::vocab::DEFAULT_BASE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Constants {
    /// ppm
    pub ambient_co: f64,
    /// °C; also the temperature floor
    pub ambient_temp: f64,
    /// δ: pull toward the neighbour mean per tick
    pub diffusion: f64,
    /// λ: pull toward ambient per tick
    pub decay: f64,
    pub move_probability: f64,
    /// default σ for sensors without their own
    pub sensor_noise: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            ambient_co: 2.0,
            ambient_temp: 18.0,
            diffusion: 0.1,
            decay: 0.05,
            move_probability: 0.3,
            sensor_noise: 0.0,
        }
    }
}

/// Partial override of [`Constants`], as found in scenario files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantsPatch {
    pub ambient_co: Option<f64>,
    pub ambient_temp: Option<f64>,
    pub diffusion: Option<f64>,
    pub decay: Option<f64>,
    pub move_probability: Option<f64>,
    pub sensor_noise: Option<f64>,
}

impl Constants {
    pub fn apply(&mut self, patch: &ConstantsPatch) {
        let pairs = [
            (&mut self.ambient_co, patch.ambient_co),
            (&mut self.ambient_temp, patch.ambient_temp),
            (&mut self.diffusion, patch.diffusion),
            (&mut self.decay, patch.decay),
            (&mut self.move_probability, patch.move_probability),
            (&mut self.sensor_noise, patch.sensor_noise),
        ];
        for (slot, value) in pairs {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunnelConfig {
    pub id: String,
    pub from: String,
    pub to: String,
    /// metres
    #[serde(default)]
    pub length: f64,
    #[serde(default)]
    pub exit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerConfig {
    pub id: String,
    pub tunnel: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    #[serde(alias = "CO")]
    Co,
    Temperature,
    Location,
}

impl SensorKind {
    /// Local name of the observed property.
    pub fn property(self) -> &'static str {
        match self {
            SensorKind::Co => "CO",
            SensorKind::Temperature => "Temperature",
            SensorKind::Location => "Location",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attachment {
    Tunnel(String),
    Worker(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub id: String,
    pub kind: SensorKind,
    #[serde(flatten)]
    pub attachment: Attachment,
    #[serde(default = "default_period")]
    pub period: u64,
    #[serde(default)]
    pub noise: Option<f64>,
}

fn default_period() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorldConfig {
    #[serde(default = "default_base")]
    pub base: String,
    #[serde(default)]
    pub constants: Constants,
    pub tunnels: Vec<TunnelConfig>,
    #[serde(default)]
    pub workers: Vec<WorkerConfig>,
    #[serde(default)]
    pub sensors: Vec<SensorConfig>,
    /// Starting CO per tunnel; others start at ambient.
    #[serde(default)]
    pub initial_co: BTreeMap<String, f64>,
}

fn default_base() -> String {
    DEFAULT_BASE.to_string()
}

impl WorldConfig {
    /// The shipped mine layout.
    pub fn default_mine() -> Self {
        serde_json::from_str(crate::defaults::WORLD_JSON).expect("shipped world config parses")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        let c = &self.constants;
        for (name, v) in [
            ("ambientCo", c.ambient_co),
            ("ambientTemp", c.ambient_temp),
            ("sensorNoise", c.sensor_noise),
        ] {
            if !v.is_finite() || (name != "ambientTemp" && v < 0.0) {
                return bad(format!("{name} must be a finite non-negative number"));
            }
        }
        for (name, v) in [
            ("diffusion", c.diffusion),
            ("decay", c.decay),
            ("moveProbability", c.move_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.tunnels.is_empty() {
            return bad("no tunnels".into());
        }
        let mut tunnels = BTreeSet::new();
        for t in &self.tunnels {
            if !crate::rdf::is_local_name(&t.id) {
                return bad(format!("tunnel id {:?} is not a valid local name", t.id));
            }
            if !tunnels.insert(t.id.as_str()) {
                return Err(SimError::DuplicateId(t.id.clone()));
            }
        }
        let mut workers = BTreeSet::new();
        for w in &self.workers {
            if !crate::rdf::is_local_name(&w.id) {
                return bad(format!("worker id {:?} is not a valid local name", w.id));
            }
            if !workers.insert(w.id.as_str()) {
                return Err(SimError::DuplicateId(w.id.clone()));
            }
            if !tunnels.contains(w.tunnel.as_str()) {
                return Err(SimError::UnknownTunnel(w.tunnel.clone()));
            }
        }
        let mut sensors = BTreeSet::new();
        for s in &self.sensors {
            if !crate::rdf::is_local_name(&s.id) {
                return bad(format!("sensor id {:?} is not a valid local name", s.id));
            }
            if !sensors.insert(s.id.as_str()) {
                return Err(SimError::DuplicateId(s.id.clone()));
            }
            match (&s.attachment, s.kind) {
                (Attachment::Tunnel(t), SensorKind::Co | SensorKind::Temperature) => {
                    if !tunnels.contains(t.as_str()) {
                        return Err(SimError::UnknownTunnel(t.clone()));
                    }
                }
                (Attachment::Worker(w), SensorKind::Location) => {
                    if !workers.contains(w.as_str()) {
                        return Err(SimError::UnknownWorker(w.clone()));
                    }
                }
                _ => return bad(format!("sensor {} has the wrong kind of attachment", s.id)),
            }
            if s.period == 0 {
                return bad(format!("sensor {} has period 0", s.id));
            }
            if s.noise.is_some_and(|n| !n.is_finite() || n < 0.0) {
                return bad(format!("sensor {} has invalid noise", s.id));
            }
        }
        for (t, v) in &self.initial_co {
            if !tunnels.contains(t.as_str()) {
                return Err(SimError::UnknownTunnel(t.clone()));
            }
            if !v.is_finite() || *v < 0.0 {
                return bad(format!("initial CO for {t} must be non-negative"));
            }
        }
        Ok(())
    }
}
