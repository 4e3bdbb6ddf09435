use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Iri, PrefixMap, RdfError, Term, Triple, Variable};

/// A set of ground triples plus the prefixes it was written with.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    #[serde(default)]
    prefixes: PrefixMap,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_prefixes(prefixes: PrefixMap) -> Self {
        Graph {
            triples: BTreeSet::new(),
            prefixes,
        }
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixMap {
        &mut self.prefixes
    }

    /// Returns `false` if the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, RdfError> {
        triple.check_ground()?;
        Ok(self.triples.insert(triple))
    }

    /// Merge another graph's triples (and prefixes not already bound).
    pub fn merge(&mut self, other: &Graph) {
        self.triples.extend(other.triples.iter().cloned());
        for (k, v) in other.prefixes.iter() {
            if self.prefixes.get(k).is_none() {
                self.prefixes.insert(k, v);
            }
        }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Every distinct term occurring in the graph.
    pub fn terms(&self) -> BTreeSet<&Term> {
        self.triples.iter().flat_map(|t| t.terms()).collect()
    }

    pub fn objects<'a>(&'a self, subject: &'a Term, predicate: &'a str) -> impl Iterator<Item = &'a Term> {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate.as_iri().map(Iri::as_str) == Some(predicate))
            .map(|t| &t.object)
    }
}

impl FromIterator<Triple> for Graph {
    /// Panics on non-ground triples.
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t).expect("ground triple");
        }
        g
    }
}

/// An ordered, non-empty conjunction of triple patterns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Triple>", into = "Vec<Triple>")]
pub struct GraphPattern {
    triples: Vec<Triple>,
}

impl GraphPattern {
    pub fn new(triples: Vec<Triple>) -> Result<Self, RdfError> {
        if triples.is_empty() {
            return Err(RdfError::EmptyPattern);
        }
        for t in &triples {
            t.check_pattern()?;
        }
        Ok(GraphPattern { triples })
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.triples.iter().flat_map(|t| t.variables().cloned()).collect()
    }

    pub fn mentions(&self, term: &Term) -> bool {
        self.triples.iter().any(|t| t.terms().contains(&term))
    }

    /// Replace terms through `f`; used for slot substitution and renaming.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Result<GraphPattern, RdfError> {
        GraphPattern::new(
            self.triples
                .iter()
                .map(|t| Triple::new(f(&t.subject), f(&t.predicate), f(&t.object)))
                .collect(),
        )
    }

    pub fn concat(patterns: impl IntoIterator<Item = GraphPattern>) -> Result<GraphPattern, RdfError> {
        GraphPattern::new(patterns.into_iter().flat_map(|p| p.triples).collect())
    }
}

impl TryFrom<Vec<Triple>> for GraphPattern {
    type Error = RdfError;

    fn try_from(value: Vec<Triple>) -> Result<Self, Self::Error> {
        GraphPattern::new(value)
    }
}

impl From<GraphPattern> for Vec<Triple> {
    fn from(p: GraphPattern) -> Self {
        p.triples
    }
}

/// Variable assignments produced by pattern matching.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Binding(BTreeMap<Variable, Term>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn get_name(&self, name: &str) -> Option<&Term> {
        self.0.iter().find(|(k, _)| k.name() == name).map(|(_, v)| v)
    }

    pub fn insert(&mut self, var: Variable, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn covers<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> bool {
        vars.into_iter().all(|v| self.0.contains_key(v))
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Variable(v) => self.0.get(v).cloned().unwrap_or_else(|| term.clone()),
            other => other.clone(),
        }
    }

    pub fn apply(&self, triple: &Triple) -> Triple {
        Triple::new(
            self.apply_term(&triple.subject),
            self.apply_term(&triple.predicate),
            self.apply_term(&triple.object),
        )
    }

    /// Instantiate a pattern; fails naming the first variable left unbound.
    pub fn apply_pattern(&self, pattern: &GraphPattern) -> Result<Vec<Triple>, RdfError> {
        if let Some(missing) = pattern.variables().into_iter().find(|v| !self.0.contains_key(v)) {
            return Err(RdfError::Unbound(missing.name().to_string()));
        }
        Ok(pattern.triples().iter().map(|t| self.apply(t)).collect())
    }

    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Binding {
        Binding(
            vars.into_iter()
                .filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        )
    }
}

impl FromIterator<(Variable, Term)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        Binding(iter.into_iter().collect())
    }
}
