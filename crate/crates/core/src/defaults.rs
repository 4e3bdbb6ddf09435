//! Shipped default inputs: rule file, display-name ontology and mine layout.

use crate::aca::{parse_rule_file, AcaError, AggregationRule};
use crate::rdf::{parse_turtle, Graph, PrefixMap, RdfError};

pub const RULES_JSON: &str = include_str!("../data/rules.json");
pub const ONTOLOGY_TTL: &str = include_str!("../data/ontology.ttl");
pub const WORLD_JSON: &str = include_str!("../data/world.json");

pub fn rules(prefixes: &PrefixMap) -> Result<Vec<AggregationRule>, AcaError> {
    parse_rule_file(RULES_JSON, prefixes)
}

pub fn ontology(prefixes: &PrefixMap) -> Result<Graph, RdfError> {
    parse_turtle(ONTOLOGY_TTL, prefixes)
}
