use std::collections::BTreeMap;

use crate::rdf::{Graph, Triple};
use crate::sim::Sample;

/// Latest reading per sensor, plus triples that never change.
#[derive(Clone, Debug, Default)]
pub struct ObservationWindow {
    latest: BTreeMap<String, (u64, Vec<Triple>)>,
    statics: Graph,
}

impl ObservationWindow {
    pub fn new(statics: Graph) -> Self {
        ObservationWindow {
            latest: BTreeMap::new(),
            statics,
        }
    }

    /// Replace the sensor's previous reading.
    pub fn update(&mut self, sensor: impl Into<String>, tick: u64, triples: Vec<Triple>) {
        self.latest.insert(sensor.into(), (tick, triples));
    }

    pub fn merge_samples(&mut self, samples: &[Sample], base: &str) {
        for s in samples {
            self.update(s.sensor.clone(), s.tick, s.triples(base));
        }
    }

    pub fn len(&self) -> usize {
        self.latest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latest.is_empty()
    }

    /// Emission tick of each sensor's latest reading.
    pub fn emission_ticks(&self) -> impl Iterator<Item = (&str, u64)> {
        self.latest.iter().map(|(k, (t, _))| (k.as_str(), *t))
    }

    pub fn latest(&self, sensor: &str) -> Option<&[Triple]> {
        self.latest.get(sensor).map(|(_, t)| t.as_slice())
    }

    pub fn as_graph(&self) -> Graph {
        let mut graph = self.statics.clone();
        for (_, triples) in self.latest.values() {
            for t in triples {
                graph.insert(t.clone()).expect("observations are ground");
            }
        }
        graph
    }
}
