//! Discrete-time mine: tunnels with CO and temperature fields, workers,
//! sensors producing SOSA observations, emergency events and actuators.

mod config;
mod world;

use thiserror::Error;

pub use config::{
    Attachment, Constants, ConstantsPatch, SensorConfig, SensorKind, TunnelConfig, WorkerConfig, WorldConfig,
};
pub use world::{
    EventKind, MineWorld, Sample, SampleValue, TunnelState, Worker, WorkerStatus, WorldEvent, WorldSnapshot,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown tunnel {0}")]
    UnknownTunnel(String),
    #[error("unknown worker {0}")]
    UnknownWorker(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("{0:?} needs a target tunnel")]
    MissingTarget(crate::policy::ActuatorKind),
}
