//! Abstract Concept Aggregations: schema-specialized products of generic
//! aggregation rules, each pairing a natural-language label with `?var`
//! placeholders and the graph pattern it stands for.

mod label;
mod rule;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{Graph, GraphPattern, Iri, PrefixMap, Term, Variable};
use crate::schema::{schema_entails, SchemaGraph};

pub use label::{human_name, render_label, split_local_name};
pub use rule::{parse_rule_file, AcaKind, AggregationRule, LabelToken, RuleDoc, RuleFile};
pub use search::search_acas;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcaError {
    #[error("invalid rule {rule}: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("duplicate rule id {0}")]
    DuplicateRule(String),
    #[error("malformed rule file: {0}")]
    RuleFile(String),
    #[error("binding does not cover variable ?{0}")]
    MissingVariable(String),
}

/// Assignment of a rule's concept slots to schema constants.
pub type ConceptBinding = BTreeMap<Variable, Iri>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub rule_id: String,
    pub concepts: ConceptBinding,
}

/// Rendered label piece: fixed text or an exposed-variable placeholder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelPart {
    Text(String),
    Var(Variable),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Aca {
    pub id: String,
    pub label: String,
    pub parts: Vec<LabelPart>,
    pub pattern: GraphPattern,
    pub exposed_vars: Vec<Variable>,
    pub provenance: Provenance,
    pub kind: AcaKind,
}

impl Aca {
    pub fn exposes(&self, name: &str) -> bool {
        self.exposed_vars.iter().any(|v| v.name() == name)
    }

    /// Variables of the pattern that users never see.
    pub fn hidden_vars(&self) -> BTreeSet<Variable> {
        let exposed: BTreeSet<&Variable> = self.exposed_vars.iter().collect();
        self.pattern
            .variables()
            .into_iter()
            .filter(|v| !exposed.contains(v))
            .collect()
    }

    pub fn concept(&self, slot: &str) -> Option<&Iri> {
        self.provenance
            .concepts
            .iter()
            .find(|(k, _)| k.name() == slot)
            .map(|(_, v)| v)
    }
}

/// Stable content id for a (rule, concept binding) pair.
pub fn aca_id(rule_id: &str, concepts: &ConceptBinding) -> String {
    let mut h = Sha256::new();
    h.update(rule_id.as_bytes());
    for (slot, iri) in concepts {
        h.update([0u8]);
        h.update(slot.name().as_bytes());
        h.update(*b"=");
        h.update(iri.as_str().as_bytes());
    }
    format!("aca-{}", &hex::encode(h.finalize())[..16])
}

/// Concept-slot assignments under which the rule body embeds into the schema.
/// Slots landing on a wildcard or a literal do not name a concept and are dropped.
pub fn check_applicability(rule: &AggregationRule, schema: &SchemaGraph) -> BTreeSet<ConceptBinding> {
    schema_entails(schema, rule.body())
        .into_iter()
        .filter_map(|mapping| {
            rule.concept_slots()
                .iter()
                .map(|slot| match mapping.get(slot) {
                    Some(Term::Iri(iri)) => Some((slot.clone(), iri.clone())),
                    _ => None,
                })
                .collect::<Option<ConceptBinding>>()
        })
        .collect()
}

fn instantiate(rule: &AggregationRule, concepts: &ConceptBinding, names: &Graph) -> Aca {
    let pattern = rule
        .body()
        .map_terms(|t| match t {
            Term::Variable(v) => concepts.get(v).cloned().map(Term::Iri).unwrap_or_else(|| t.clone()),
            other => other.clone(),
        })
        .expect("substituting IRIs keeps a valid pattern");

    let mut parts: Vec<LabelPart> = Vec::new();
    let push_text = |parts: &mut Vec<LabelPart>, s: &str| match parts.last_mut() {
        Some(LabelPart::Text(prev)) => prev.push_str(s),
        _ => parts.push(LabelPart::Text(s.to_string())),
    };
    for tok in rule.label_template() {
        match tok {
            LabelToken::Text(s) => push_text(&mut parts, s),
            LabelToken::Concept(slot) => {
                let iri = concepts
                    .iter()
                    .find(|(k, _)| k.name() == slot)
                    .map(|(_, v)| v)
                    .expect("validated slot");
                push_text(&mut parts, &human_name(iri, names));
            }
            LabelToken::Var(v) => parts.push(LabelPart::Var(Variable::new(v.clone()).expect("validated var"))),
        }
    }
    let label = parts
        .iter()
        .map(|p| match p {
            LabelPart::Text(s) => s.clone(),
            LabelPart::Var(v) => v.to_string(),
        })
        .collect();

    Aca {
        id: aca_id(rule.id(), concepts),
        label,
        parts,
        pattern,
        exposed_vars: rule.exposed_vars().to_vec(),
        provenance: Provenance {
            rule_id: rule.id().to_string(),
            concepts: concepts.clone(),
        },
        kind: rule.kind(),
    }
}

/// One ACA per applicable (rule, concept binding), sorted by rule id and
/// then by the bound concept IRIs in slot order.
pub fn generate_acas(rules: &[AggregationRule], schema: &SchemaGraph, names: &Graph) -> Vec<Aca> {
    let mut keyed: Vec<((String, Vec<String>), Aca)> = Vec::new();
    for rule in rules {
        for concepts in check_applicability(rule, schema) {
            let key: Vec<String> = rule
                .concept_slots()
                .iter()
                .map(|s| concepts[s].as_str().to_string())
                .collect();
            keyed.push(((rule.id().to_string(), key), instantiate(rule, &concepts, names)));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.dedup_by(|a, b| a.1.id == b.1.id);
    keyed.into_iter().map(|(_, aca)| aca).collect()
}

/// The ACAs on offer plus the naming context they were rendered with.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Catalog {
    acas: Vec<Aca>,
    names: Graph,
    prefixes: PrefixMap,
    rule_count: usize,
    applicable_rules: usize,
}

impl Catalog {
    pub fn build(rules: &[AggregationRule], schema: &SchemaGraph, names: Graph, prefixes: PrefixMap) -> Self {
        let acas = generate_acas(rules, schema, &names);
        let applicable_rules = rules
            .iter()
            .filter(|r| acas.iter().any(|a| a.provenance.rule_id == r.id()))
            .count();
        Catalog {
            acas,
            names,
            prefixes,
            rule_count: rules.len(),
            applicable_rules,
        }
    }

    pub fn acas(&self) -> &[Aca] {
        &self.acas
    }

    pub fn names(&self) -> &Graph {
        &self.names
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn rule_count(&self) -> usize {
        self.rule_count
    }

    pub fn applicable_rules(&self) -> usize {
        self.applicable_rules
    }

    pub fn get(&self, id: &str) -> Option<&Aca> {
        self.acas.iter().find(|a| a.id == id)
    }

    /// Look up by id, falling back to an exact label match.
    pub fn resolve(&self, reference: &str) -> Option<&Aca> {
        self.get(reference).or_else(|| {
            let mut hits = self.acas.iter().filter(|a| a.label == reference);
            match (hits.next(), hits.next()) {
                (Some(a), None) => Some(a),
                _ => None,
            }
        })
    }

    pub fn search(&self, query: &str) -> Vec<&Aca> {
        search_acas(query, &self.acas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::rdf::{parse_pattern, parse_turtle, vocab::DEFAULT_BASE};
    use crate::schema::load_declared_schema;

    fn prefixes() -> PrefixMap {
        PrefixMap::with_defaults(DEFAULT_BASE)
    }

    fn observation_rule() -> AggregationRule {
        defaults::rules(&prefixes())
            .unwrap()
            .into_iter()
            .find(|r| r.kind() == AcaKind::Observation)
            .unwrap()
    }

    fn schema(extra: &str) -> SchemaGraph {
        load_declared_schema(
            &format!(
                "?x sosa:observedProperty :CO . ?x sosa:hasResult ?y .\n\
                 ?x sosa:hasFeatureOfInterest ?z . ?z rdf:type :Tunnel .\n{extra}"
            ),
            &prefixes(),
        )
        .unwrap()
    }

    fn iri(local: &str) -> Iri {
        Iri::new(format!("{DEFAULT_BASE}{local}")).unwrap()
    }

    fn var(n: &str) -> Variable {
        Variable::new(n).unwrap()
    }

    #[test]
    fn applicability_co_tunnel() {
        let got = check_applicability(&observation_rule(), &schema(""));
        let expected: ConceptBinding = [(var("P"), iri("CO")), (var("C"), iri("Tunnel"))].into_iter().collect();
        assert_eq!(got, BTreeSet::from([expected]));
    }

    #[test]
    fn applicability_empty_schema() {
        assert!(check_applicability(&observation_rule(), &SchemaGraph::empty()).is_empty());
    }

    #[test]
    fn applicability_with_temperature() {
        let s =
            schema("?t sosa:observedProperty :Temperature . ?t sosa:hasResult ?v . ?t sosa:hasFeatureOfInterest ?z .");
        let got = check_applicability(&observation_rule(), &s);
        let co: ConceptBinding = [(var("P"), iri("CO")), (var("C"), iri("Tunnel"))].into_iter().collect();
        let temp: ConceptBinding = [(var("P"), iri("Temperature")), (var("C"), iri("Tunnel"))]
            .into_iter()
            .collect();
        assert_eq!(got, BTreeSet::from([co, temp]));
    }

    #[test]
    fn co_label_from_default_rule() {
        let names = parse_turtle(":CO rdfs:label \"carbon monoxide concentration\" .", &prefixes()).unwrap();
        let acas = generate_acas(&[observation_rule()], &schema(""), &names);
        assert_eq!(acas.len(), 1);
        let aca = &acas[0];
        assert_eq!(aca.label, "the carbon monoxide concentration of tunnel ?a is ?b");
        let observation_pattern = parse_pattern(
            "?s sosa:observedProperty :CO . ?s sosa:hasResult ?b .\n\
             ?s sosa:hasFeatureOfInterest ?a . ?a rdf:type :Tunnel .",
            &prefixes(),
        )
        .unwrap();
        assert_eq!(aca.pattern, observation_pattern);
        assert_eq!(aca.hidden_vars(), BTreeSet::from([var("s")]));
        assert_eq!(aca.id, aca_id("observation-of-feature", &aca.provenance.concepts));
    }

    #[test]
    fn no_rules_no_acas() {
        assert!(generate_acas(&[], &schema(""), &Graph::new()).is_empty());
    }

    #[test]
    fn no_methane_without_detectors() {
        let rules = defaults::rules(&prefixes()).unwrap();
        let methane = Term::Iri(iri("Methane"));
        for aca in generate_acas(&rules, &schema(""), &Graph::new()) {
            assert!(!aca.pattern.mentions(&methane));
        }
    }

    #[test]
    fn output_sorted_and_order_independent() {
        let s =
            schema("?t sosa:observedProperty :Temperature . ?t sosa:hasResult ?v . ?t sosa:hasFeatureOfInterest ?z .");
        let mut rules = defaults::rules(&prefixes()).unwrap();
        let a = generate_acas(&rules, &s, &Graph::new());
        rules.reverse();
        let b = generate_acas(&rules, &s, &Graph::new());
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a[0].label.contains("co of"));
        assert!(a[1].label.contains("temperature of"));
    }

    #[test]
    fn catalog_resolve_by_label() {
        let cat = Catalog::build(&[observation_rule()], &schema(""), Graph::new(), prefixes());
        let aca = &cat.acas()[0];
        assert_eq!(cat.resolve(&aca.id).unwrap().id, aca.id);
        assert_eq!(cat.resolve("the co of tunnel ?a is ?b").unwrap().id, aca.id);
        assert!(cat.resolve("nothing").is_none());
        assert_eq!(cat.applicable_rules(), 1);
    }
}
