//! If-then policies over ACAs, their compilation to conjunctive queries with
//! threshold filters, and evaluation into actuator commands.

mod compile;
mod eval;
mod sparql;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{GraphPattern, Iri, PrefixMap, Term, Variable};

pub use compile::compile_policy;
pub use eval::{action_instances, evaluate, evaluate_unprojected, EvalError};
pub use sparql::{pattern_block, serialize_query};
pub use validate::validate_policy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=", alias = "≤")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=", alias = "≥")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=", alias = "≠")]
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Right-hand side of a comparison as written in a policy document: a
/// number, or an IRI in prefixed or absolute form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Number(f64),
    Iri(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub var: Variable,
    pub op: CmpOp,
    pub value: Constant,
}

/// One use of an ACA in the IF part. `rename` maps the ACA's exposed
/// variables to policy-level names; unmapped ones keep their own name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRef {
    pub aca: String,
    #[serde(default)]
    pub rename: BTreeMap<Variable, Variable>,
}

/// The THEN part: an actuation ACA and which condition variable feeds each
/// of its exposed variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionRef {
    pub aca: String,
    #[serde(default)]
    pub args: BTreeMap<Variable, Variable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Policy {
    pub id: String,
    #[serde(default)]
    pub name: String,
    #[serde(alias = "conditions")]
    pub condition_acas: Vec<ConditionRef>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    pub action: ActionRef,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
}

fn enabled_default() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActuatorKind {
    EvacuateTunnel,
    EvacuateMine,
    GeofenceTunnel,
}

impl ActuatorKind {
    /// Actuator implemented by a command class, matched on its local name.
    pub fn from_class(class: &Iri) -> Option<Self> {
        match class.local_name() {
            "EvacuateTunnel" => Some(ActuatorKind::EvacuateTunnel),
            "EvacuateMine" => Some(ActuatorKind::EvacuateMine),
            "GeofenceTunnel" => Some(ActuatorKind::GeofenceTunnel),
            _ => None,
        }
    }

    pub fn is_targeted(self) -> bool {
        !matches!(self, ActuatorKind::EvacuateMine)
    }
}

impl fmt::Display for ActuatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActuatorCommand {
    pub kind: ActuatorKind,
    pub target: Option<String>,
    pub source_policy: String,
    pub tick: u64,
}

/// A compiled comparison; `value` is a number literal or an IRI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filter {
    pub var: Variable,
    pub op: CmpOp,
    pub value: Term,
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.var, self.op, self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionSpec {
    pub kind: ActuatorKind,
    pub target: Option<Variable>,
}

/// Where each condition ACA's exposed variables ended up in the query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompiledCondition {
    pub aca: String,
    pub vars: BTreeMap<Variable, Variable>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompiledQuery {
    pub pattern: GraphPattern,
    pub filters: Vec<Filter>,
    pub projection: Vec<Variable>,
    pub action: ActionSpec,
    pub conditions: Vec<CompiledCondition>,
    pub prefixes: PrefixMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    EmptyId,
    NoConditions,
    UnknownAca,
    WrongAcaKind,
    UnknownVariable,
    UnboundVariable,
    InvalidConstant,
    UnsupportedActuator,
    MissingTarget,
    DisconnectedCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid policy: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
pub struct PolicyError(pub Vec<Diagnostic>);

impl PolicyError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::aca::Catalog;
    use crate::defaults;
    use crate::rdf::{parse_pattern, parse_turtle, vocab::DEFAULT_BASE, Binding, Graph};
    use crate::schema::load_declared_schema;

    const CO_LABEL: &str = "the carbon monoxide concentration of tunnel ?a is ?b";
    const TEMP_LABEL: &str = "the temperature of tunnel ?a is ?b";
    const EVACUATE_LABEL: &str = "evacuate tunnel ?a";

    fn prefixes() -> PrefixMap {
        PrefixMap::with_defaults(DEFAULT_BASE)
    }

    fn catalog() -> Catalog {
        let p = prefixes();
        let schema = load_declared_schema(
            "?x sosa:observedProperty :CO . ?x sosa:hasResult ?y .\n\
             ?x sosa:hasFeatureOfInterest ?z . ?z rdf:type :Tunnel .\n\
             ?t sosa:observedProperty :Temperature . ?t sosa:hasResult ?v . ?t sosa:hasFeatureOfInterest ?z .\n\
             ?c rdf:type :EvacuateTunnel . ?c :targets ?z .\n\
             ?g rdf:type :GeofenceTunnel . ?g :targets ?z .\n\
             ?w sosa:observedProperty :Location . ?w sosa:hasResult ?r . ?w sosa:hasFeatureOfInterest ?k . ?k rdf:type :Worker .",
            &p,
        )
        .unwrap();
        Catalog::build(
            &defaults::rules(&p).unwrap(),
            &schema,
            defaults::ontology(&p).unwrap(),
            p,
        )
    }

    fn var(n: &str) -> Variable {
        Variable::new(n).unwrap()
    }

    fn co_policy(threshold: f64, op: CmpOp) -> Policy {
        serde_json::from_value(serde_json::json!({
            "id": "co-evacuate",
            "name": "evacuate on CO",
            "conditionAcas": [{"aca": CO_LABEL}],
            "comparisons": [{"var": "b", "op": op, "value": threshold}],
            "action": {"aca": EVACUATE_LABEL, "args": {"a": "a"}}
        }))
        .unwrap()
    }

    fn readings(values: &[(&str, &str)]) -> Graph {
        let mut text = String::new();
        for (i, (tunnel, value)) in values.iter().enumerate() {
            text.push_str(&format!(
                ":o{i} sosa:observedProperty :CO ; sosa:hasResult {value} ; sosa:hasFeatureOfInterest :{tunnel} .\n\
                 :{tunnel} rdf:type :Tunnel .\n"
            ));
        }
        parse_turtle(&text, &prefixes()).unwrap()
    }

    fn binding_a(local: &str) -> Binding {
        [(var("a"), Term::iri(format!("{DEFAULT_BASE}{local}")).unwrap())]
            .into_iter()
            .collect()
    }

    #[test]
    fn co_policy_validates() {
        validate_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
    }

    #[test]
    fn unbound_comparison_variable() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.comparisons[0].var = var("z");
        let err = validate_policy(&p, &catalog()).unwrap_err();
        assert!(
            err.diagnostics().iter().any(|d| d.message == "unbound variable z"),
            "{err}"
        );
    }

    #[test]
    fn unknown_aca() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.condition_acas[0].aca = "aca-nope".into();
        let err = validate_policy(&p, &catalog()).unwrap_err();
        assert_eq!(err.diagnostics()[0].code, DiagnosticCode::UnknownAca);
        assert!(err.to_string().contains("aca-nope"));
    }

    #[test]
    fn disconnected_conditions() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.condition_acas.push(ConditionRef {
            aca: TEMP_LABEL.into(),
            rename: [(var("a"), var("a2")), (var("b"), var("t"))].into_iter().collect(),
        });
        let err = validate_policy(&p, &catalog()).unwrap_err();
        assert!(err
            .diagnostics()
            .iter()
            .any(|d| d.message.starts_with("disconnected condition")));
    }

    #[test]
    fn actuation_aca_as_condition_rejected() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.condition_acas[0].aca = EVACUATE_LABEL.into();
        let err = validate_policy(&p, &catalog()).unwrap_err();
        assert!(err.diagnostics().iter().any(|d| d.code == DiagnosticCode::WrongAcaKind));
    }

    #[test]
    fn compile_co_policy() {
        let q = compile_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
        let observation_pattern = parse_pattern(
            "?s sosa:observedProperty :CO . ?s sosa:hasResult ?b . ?s sosa:hasFeatureOfInterest ?a . ?a rdf:type :Tunnel .",
            &prefixes(),
        )
        .unwrap();
        assert_eq!(q.pattern.len(), 4);
        let got: BTreeSet<_> = q.pattern.triples().iter().collect();
        let want: BTreeSet<_> = observation_pattern.triples().iter().collect();
        assert_eq!(got, want);
        assert_eq!(q.filters.len(), 1);
        assert_eq!(q.filters[0].to_string(), "?b > 50");
        assert_eq!(q.projection, vec![var("a")]);
        assert_eq!(q.action.kind, ActuatorKind::EvacuateTunnel);
        assert_eq!(q.action.target, Some(var("a")));
    }

    #[test]
    fn compile_without_filter() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.comparisons.clear();
        let q = compile_policy(&p, &catalog()).unwrap();
        let aca = catalog().resolve(CO_LABEL).unwrap().clone();
        assert_eq!(q.pattern, aca.pattern);
        assert!(q.filters.is_empty());
        assert_eq!(q.projection, vec![var("a")]);
        assert!(!serialize_query(&q).contains("FILTER"));
    }

    #[test]
    fn two_co_acas_rename_hidden_apart() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.condition_acas.push(ConditionRef {
            aca: CO_LABEL.into(),
            rename: [(var("b"), var("b2"))].into_iter().collect(),
        });
        let q = compile_policy(&p, &catalog()).unwrap();
        assert_eq!(q.pattern.len(), 8);
        let vars = q.pattern.variables();
        let want: BTreeSet<_> = ["a", "b", "b2", "s_1", "s_2"].iter().map(|n| var(n)).collect();
        assert_eq!(vars, want);
        let first: BTreeSet<_> = q.pattern.triples()[..4].iter().flat_map(|t| t.variables()).collect();
        let second: BTreeSet<_> = q.pattern.triples()[4..].iter().flat_map(|t| t.variables()).collect();
        assert_eq!(
            first.intersection(&second).copied().collect::<BTreeSet<_>>(),
            BTreeSet::from([&var("a")])
        );
    }

    #[test]
    fn hidden_name_clash_with_policy_variable() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.condition_acas[0].rename.insert(var("b"), var("s"));
        p.comparisons[0].var = var("s");
        let q = compile_policy(&p, &catalog()).unwrap();
        assert!(q.pattern.variables().contains(&var("s_1")));
        assert_eq!(q.pattern.variables().len(), 3);
    }

    #[test]
    fn evaluate_examples() {
        let q = compile_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
        let g = readings(&[("t1", "10"), ("t3", "67")]);
        assert_eq!(evaluate(&q, &g).unwrap(), BTreeSet::from([binding_a("t3")]));
        let g = readings(&[("t1", "10"), ("t3", "10")]);
        assert!(evaluate(&q, &g).unwrap().is_empty());
    }

    #[test]
    fn boundary_semantics() {
        let g = readings(&[("t3", "50")]);
        let ge = compile_policy(&co_policy(50.0, CmpOp::Ge), &catalog()).unwrap();
        let gt = compile_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
        assert_eq!(evaluate(&ge, &g).unwrap().len(), 1);
        assert!(evaluate(&gt, &g).unwrap().is_empty());
        let g = readings(&[("t3", "50.01")]);
        assert_eq!(evaluate(&gt, &g).unwrap().len(), 1);
    }

    #[test]
    fn ordering_on_iri_is_an_error() {
        let mut q = compile_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
        q.filters[0].var = var("a");
        let err = evaluate(&q, &readings(&[("t3", "67")])).unwrap_err();
        assert!(err.to_string().contains("?a > 50"), "{err}");
    }

    #[test]
    fn iri_equality_filter() {
        let mut p = co_policy(50.0, CmpOp::Gt);
        p.comparisons = vec![Comparison {
            var: var("a"),
            op: CmpOp::Eq,
            value: Constant::Iri(":t3".into()),
        }];
        let q = compile_policy(&p, &catalog()).unwrap();
        let g = readings(&[("t1", "70"), ("t3", "10")]);
        assert_eq!(evaluate(&q, &g).unwrap(), BTreeSet::from([binding_a("t3")]));
        p.comparisons[0].op = CmpOp::Ne;
        let q = compile_policy(&p, &catalog()).unwrap();
        assert_eq!(evaluate(&q, &g).unwrap(), BTreeSet::from([binding_a("t1")]));
    }

    #[test]
    fn action_instances_examples() {
        let p = co_policy(50.0, CmpOp::Gt);
        let q = compile_policy(&p, &catalog()).unwrap();
        let cmds = action_instances(&p, &q, &BTreeSet::from([binding_a("t3")]), 7);
        assert_eq!(
            cmds,
            vec![ActuatorCommand {
                kind: ActuatorKind::EvacuateTunnel,
                target: Some("t3".into()),
                source_policy: "co-evacuate".into(),
                tick: 7,
            }]
        );
        assert!(action_instances(&p, &q, &BTreeSet::new(), 7).is_empty());

        let unprojected = evaluate_unprojected(&q, &readings(&[("t3", "60"), ("t3", "70")])).unwrap();
        assert_eq!(unprojected.len(), 2);
        assert_eq!(action_instances(&p, &q, &unprojected, 7).len(), 1);
    }

    #[test]
    fn serialized_co_query() {
        let q = compile_policy(&co_policy(50.0, CmpOp::Gt), &catalog()).unwrap();
        let text = serialize_query(&q);
        for line in [
            "?s sosa:observedProperty :CO .",
            "?s sosa:hasResult ?b .",
            "?s sosa:hasFeatureOfInterest ?a .",
            "?a rdf:type :Tunnel .",
            "FILTER (?b > 50)",
            "SELECT DISTINCT ?a",
        ] {
            assert!(text.contains(line), "missing {line:?} in\n{text}");
        }
        assert!(!text.contains("PREFIX rdfs:"));
        assert_eq!(text, serialize_query(&q.clone()));
        let reparsed = parse_pattern(&pattern_block(&text), &PrefixMap::empty()).unwrap();
        assert_eq!(reparsed, q.pattern);
    }

    #[test]
    fn policy_json_round_trip() {
        let p = co_policy(50.0, CmpOp::Ge);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\">=\""));
        assert_eq!(serde_json::from_str::<Policy>(&text).unwrap(), p);
    }
}
