//! Triplestore schemas and rule applicability.
//!
//! A schema is a set of triple patterns whose variables act as wildcards:
//! each schema triple says "triples of this shape may occur". Schemas are
//! either extracted from data or declared in a pattern document, and are
//! always kept in a canonical form (bisimulation-minimal, wildcards named
//! `?w0`, `?w1`, ... in a structure-derived order) so two schemas that differ
//! only by wildcard names or redundant copies of a shape compare equal.
//!
//! Applicability of a rule body is the existence of a homomorphism from the
//! body into the schema that keeps constants fixed, where a schema wildcard
//! may absorb any body term.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{parse_pattern_triples, vocab, Graph, GraphPattern, Iri, PrefixMap, RdfError, Term, Triple, Variable};

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("schema predicate must be an IRI: {0}")]
    NonIriPredicate(String),
}

/// Which predicates keep their object as a constant during extraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaConfig {
    pub constant_object_predicates: BTreeSet<Iri>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            constant_object_predicates: [vocab::RDF_TYPE, vocab::SOSA_OBSERVED_PROPERTY]
                .into_iter()
                .map(|s| Iri::new(s).expect("static IRI"))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaGraph {
    triples: BTreeSet<Triple>,
}

impl SchemaGraph {
    pub fn empty() -> Self {
        SchemaGraph::default()
    }

    /// Build a canonical schema from pattern triples (variables are wildcards).
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self, SchemaError> {
        let mut names: HashMap<Variable, usize> = HashMap::new();
        let mut edges = Vec::new();
        let node = |t: &Term, names: &mut HashMap<Variable, usize>| match t {
            Term::Variable(v) => {
                let next = names.len();
                Node::Wild(*names.entry(v.clone()).or_insert(next))
            }
            other => Node::Const(other.clone()),
        };
        for t in triples {
            t.check_pattern()?;
            let Term::Iri(p) = &t.predicate else {
                return Err(SchemaError::NonIriPredicate(t.to_string()));
            };
            let s = node(&t.subject, &mut names);
            let o = node(&t.object, &mut names);
            edges.push((s, p.clone(), o));
        }
        Ok(canonicalize(minimize(edges)))
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Every constant (non-wildcard) term in the schema.
    pub fn constants(&self) -> BTreeSet<&Term> {
        self.triples
            .iter()
            .flat_map(|t| t.terms())
            .filter(|t| !t.is_variable())
            .collect()
    }

    pub fn mentions(&self, term: &Term) -> bool {
        self.triples.iter().any(|t| t.terms().contains(&term))
    }

    /// Union of two schemas, re-canonicalized.
    pub fn union(&self, other: &SchemaGraph) -> SchemaGraph {
        let rename = |t: &Term, tag: &str| match t {
            Term::Variable(v) => Term::var(format!("{}_{tag}", v.name())).expect("valid name"),
            other => other.clone(),
        };
        let tagged = |s: &SchemaGraph, tag: &'static str| {
            s.triples
                .iter()
                .map(move |t| Triple::new(rename(&t.subject, tag), t.predicate.clone(), rename(&t.object, tag)))
                .collect::<Vec<_>>()
        };
        let mut all = tagged(self, "l");
        all.extend(tagged(other, "r"));
        SchemaGraph::from_triples(all).expect("schema triples stay valid")
    }
}

/// Witness of applicability: image of each body variable in the schema.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SchemaMapping(BTreeMap<Variable, Term>);

impl SchemaMapping {
    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Const(Term),
    Wild(usize),
}

/// Abstract a ground graph into its schema with the default configuration.
pub fn extract_schema(graph: &Graph) -> SchemaGraph {
    extract_schema_with(graph, &SchemaConfig::default())
}

/// Objects of constant-object predicates become vocabulary constants and
/// stay constant wherever they occur. Every other IRI becomes one wildcard
/// per data node (so shapes sharing a subject stay connected); each literal
/// occurrence becomes a fresh wildcard.
pub fn extract_schema_with(graph: &Graph, config: &SchemaConfig) -> SchemaGraph {
    let vocabulary: BTreeSet<&Term> = graph
        .iter()
        .filter(|t| {
            t.predicate
                .as_iri()
                .is_some_and(|p| config.constant_object_predicates.contains(p))
        })
        .map(|t| &t.object)
        .collect();

    let mut named: HashMap<&Term, usize> = HashMap::new();
    let mut fresh = 0usize;
    let mut edges = Vec::with_capacity(graph.len());
    for t in graph.iter() {
        let Term::Iri(p) = &t.predicate else { continue };
        let mut ends = [Node::Wild(0), Node::Wild(0)];
        for (slot, term) in ends.iter_mut().zip([&t.subject, &t.object]) {
            *slot = if vocabulary.contains(term) {
                Node::Const(term.clone())
            } else if matches!(term, Term::Literal(_)) {
                fresh += 1;
                Node::Wild(usize::MAX - fresh)
            } else {
                let next = named.len();
                Node::Wild(*named.entry(term).or_insert(next))
            };
        }
        let [s, o] = ends;
        edges.push((s, p.clone(), o));
    }
    canonicalize(minimize(edges))
}

/// Parse a declared schema document (pattern grammar; variables are wildcards).
pub fn load_declared_schema(text: &str, prefixes: &PrefixMap) -> Result<SchemaGraph, SchemaError> {
    let (triples, _) = parse_pattern_triples(text, prefixes)?;
    SchemaGraph::from_triples(triples)
}

type Edges = Vec<(Node, Iri, Node)>;

fn digest(parts: impl IntoIterator<Item = String>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Color refinement over outgoing edges until the partition is stable.
/// The stable coloring is the coarsest forward bisimulation; it is
/// invariant under renaming of wildcard ids.
fn refine(edges: &Edges) -> BTreeMap<usize, String> {
    let mut colors: BTreeMap<usize, String> = BTreeMap::new();
    for (s, _, o) in edges {
        for n in [s, o] {
            if let Node::Wild(id) = n {
                colors.insert(*id, "w".to_string());
            }
        }
    }
    let mut classes = 1usize.min(colors.len());
    loop {
        let color_of = |n: &Node, colors: &BTreeMap<usize, String>| match n {
            Node::Const(t) => format!("c{t}"),
            Node::Wild(id) => colors[id].clone(),
        };
        let mut signatures: BTreeMap<usize, BTreeSet<String>> = colors.keys().map(|k| (*k, BTreeSet::new())).collect();
        for (s, p, o) in edges {
            if let Node::Wild(id) = s {
                signatures
                    .get_mut(id)
                    .expect("seeded")
                    .insert(format!("{p} {}", color_of(o, &colors)));
            }
        }
        let next: BTreeMap<usize, String> = signatures
            .into_iter()
            .map(|(id, sig)| (id, digest(std::iter::once(colors[&id].clone()).chain(sig))))
            .collect();
        let next_classes = next.values().collect::<BTreeSet<_>>().len();
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

/// Merge bisimilar wildcards.
fn minimize(edges: Edges) -> Edges {
    let colors = refine(&edges);
    let block: HashMap<&String, usize> = colors
        .values()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    let map = |n: &Node| match n {
        Node::Wild(id) => Node::Wild(block[&colors[id]]),
        c => c.clone(),
    };
    let merged: BTreeSet<(Node, Iri, Node)> = edges.iter().map(|(s, p, o)| (map(s), p.clone(), map(o))).collect();
    merged.into_iter().collect()
}

/// Name wildcards of a minimized graph by the order of their stable colors.
fn canonicalize(edges: Edges) -> SchemaGraph {
    let colors = refine(&edges);
    let order: BTreeMap<&String, usize> = colors
        .values()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    debug_assert_eq!(order.len(), colors.len(), "input must be minimized");
    let term = |n: &Node| match n {
        Node::Const(t) => t.clone(),
        Node::Wild(id) => Term::var(format!("w{}", order[&colors[id]])).expect("valid name"),
    };
    SchemaGraph {
        triples: edges
            .iter()
            .map(|(s, p, o)| Triple::new(term(s), Term::Iri(p.clone()), term(o)))
            .collect(),
    }
}

/// All homomorphisms from `body` into `schema`.
///
/// Body constants must meet an equal schema constant or a wildcard; body
/// variables map to exactly one schema term each. An empty result means the
/// body can never match a store conforming to the schema.
pub fn schema_entails(schema: &SchemaGraph, body: &GraphPattern) -> BTreeSet<SchemaMapping> {
    let schema_triples: Vec<&Triple> = schema.triples().collect();
    let mut out = BTreeSet::new();
    search(&schema_triples, body.triples(), BTreeMap::new(), &mut out);
    out
}

fn search(
    schema: &[&Triple],
    remaining: &[Triple],
    mapping: BTreeMap<Variable, Term>,
    out: &mut BTreeSet<SchemaMapping>,
) {
    let Some((first, rest)) = remaining.split_first() else {
        out.insert(SchemaMapping(mapping));
        return;
    };
    for candidate in schema {
        if let Some(next) = unify(first, candidate, &mapping) {
            search(schema, rest, next, out);
        }
    }
}

fn unify(body: &Triple, schema: &Triple, mapping: &BTreeMap<Variable, Term>) -> Option<BTreeMap<Variable, Term>> {
    let mut next = mapping.clone();
    for (b, s) in body.terms().into_iter().zip(schema.terms()) {
        match b {
            Term::Variable(v) => match next.get(v) {
                Some(image) if image != s => return None,
                Some(_) => {}
                None => {
                    next.insert(v.clone(), s.clone());
                }
            },
            constant => {
                if !s.is_variable() && s != constant {
                    return None;
                }
            }
        }
    }
    Some(next)
}
