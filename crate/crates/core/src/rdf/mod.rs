//! RDF substrate: terms, ground graphs, conjunctive graph patterns, a
//! Turtle-subset reader and basic graph pattern matching.

mod bgp;
mod graph;
mod term;
mod turtle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bgp::{match_bgp, matches_triple};
pub use graph::{Binding, Graph, GraphPattern};
pub use term::{is_variable_name, Iri, Literal, LiteralKind, Term, Triple, Variable};
pub use turtle::{parse_pattern, parse_pattern_triples, parse_turtle};

pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const SOSA: &str = "http://www.w3.org/ns/sosa/";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const SOSA_OBSERVED_PROPERTY: &str = "http://www.w3.org/ns/sosa/observedProperty";
    pub const SOSA_HAS_RESULT: &str = "http://www.w3.org/ns/sosa/hasResult";
    pub const SOSA_HAS_FEATURE_OF_INTEREST: &str = "http://www.w3.org/ns/sosa/hasFeatureOfInterest";

    /// Default `:` namespace used by the shipped ontology, rules and world.
    pub const DEFAULT_BASE: &str = "http://example.org/mine#";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RdfError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("invalid number literal {0:?}")]
    InvalidNumber(String),
    #[error("literal in predicate position: {0}")]
    LiteralPredicate(String),
    #[error("literal in subject position: {0}")]
    LiteralSubject(String),
    #[error("triple is not ground: {0}")]
    NotGround(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix {prefix:?} at line {line}, column {column}")]
    UnknownPrefix { prefix: String, line: usize, column: usize },
    #[error("graph pattern must contain at least one triple pattern")]
    EmptyPattern,
    #[error("variable ?{0} is not bound")]
    Unbound(String),
}

/// Prefix label (without the colon) to namespace IRI.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrefixMap(BTreeMap<String, String>);

impl PrefixMap {
    pub fn empty() -> Self {
        PrefixMap(BTreeMap::new())
    }

    /// `sosa:`, `rdf:`, `rdfs:` and `:` bound to `base`.
    pub fn with_defaults(base: &str) -> Self {
        let mut map = PrefixMap::empty();
        map.insert("sosa", vocab::SOSA);
        map.insert("rdf", vocab::RDF);
        map.insert("rdfs", vocab::RDFS);
        map.insert("", base);
        map
    }

    pub fn insert(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.0.insert(prefix.into(), namespace.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn extend(&mut self, other: &PrefixMap) {
        for (k, v) in other.iter() {
            self.insert(k, v);
        }
    }

    pub fn expand(&self, prefix: &str, local: &str) -> Option<String> {
        self.get(prefix).map(|ns| format!("{ns}{local}"))
    }

    /// Expand `prefix:local` if it uses a bound prefix; absolute IRIs pass through.
    pub fn expand_curie(&self, text: &str) -> Option<String> {
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return Some(inner.to_string());
        }
        let (prefix, local) = text.split_once(':')?;
        match self.expand(prefix, local) {
            Some(iri) if is_prefix_label(prefix) => Some(iri),
            _ if local.starts_with("//") || prefix == "urn" => Some(text.to_string()),
            _ => None,
        }
    }

    /// Shortest `prefix:local` form for `iri`, falling back to `<iri>`.
    pub fn compact(&self, iri: &Iri) -> String {
        let s = iri.as_str();
        self.0
            .iter()
            .filter_map(|(prefix, ns)| {
                let local = s.strip_prefix(ns.as_str())?;
                is_local_name(local).then_some((ns.len(), prefix, local))
            })
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            .map(|(_, prefix, local)| format!("{prefix}:{local}"))
            .unwrap_or_else(|| format!("<{s}>"))
    }

    /// Term in the prefixed notation accepted by the Turtle-subset reader.
    pub fn format_term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.compact(iri),
            other => other.to_string(),
        }
    }

    pub fn format_triple(&self, triple: &Triple) -> String {
        format!(
            "{} {} {} .",
            self.format_term(&triple.subject),
            self.format_term(&triple.predicate),
            self.format_term(&triple.object)
        )
    }
}

pub(crate) fn is_prefix_label(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'),
        _ => false,
    }
}

pub(crate) fn is_local_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }
        _ => false,
    }
}
