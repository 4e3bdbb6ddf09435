//! Generators and brute-force oracles shared by the property and
//! acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use ssn_policy_forge::aca::Catalog;
use ssn_policy_forge::defaults;
use ssn_policy_forge::policy::{
    ActionSpec, ActuatorKind, CmpOp, Comparison, CompiledQuery, ConditionRef, Constant, Policy,
};
use ssn_policy_forge::rdf::vocab::DEFAULT_BASE;
use ssn_policy_forge::rdf::{match_bgp, Binding, Graph, GraphPattern, Literal, PrefixMap, Term, Triple, Variable};
use ssn_policy_forge::schema::load_declared_schema;

pub const CO_LABEL: &str = "the carbon monoxide concentration of tunnel ?a is ?b";
pub const TEMP_LABEL: &str = "the temperature of tunnel ?a is ?b";
pub const EVACUATE_LABEL: &str = "evacuate tunnel ?a";

pub fn prefixes() -> PrefixMap {
    PrefixMap::with_defaults(DEFAULT_BASE)
}

pub fn iri(local: &str) -> Term {
    Term::iri(format!("{DEFAULT_BASE}{local}")).unwrap()
}

pub fn var(name: &str) -> Variable {
    Variable::new(name).unwrap()
}

pub fn number(n: f64) -> Term {
    Term::number(n).unwrap()
}

// Small vocabulary so random patterns actually hit random graphs.

fn arb_node() -> impl Strategy<Value = Term> {
    (0..5u8).prop_map(|i| iri(&format!("n{i}")))
}

fn arb_predicate() -> impl Strategy<Value = Term> {
    (0..3u8).prop_map(|i| iri(&format!("p{i}")))
}

fn arb_object() -> impl Strategy<Value = Term> {
    prop_oneof![3 => arb_node(), 1 => (0..3u8).prop_map(|n| number(n as f64))]
}

fn arb_var() -> impl Strategy<Value = Term> {
    (0..4u8).prop_map(|i| Term::Variable(var(&format!("v{i}"))))
}

pub fn arb_graph(max_triples: usize) -> impl Strategy<Value = Graph> {
    prop::collection::vec((arb_node(), arb_predicate(), arb_object()), 0..=max_triples)
        .prop_map(|ts| ts.into_iter().map(|(s, p, o)| Triple::new(s, p, o)).collect())
}

pub fn arb_pattern(max_triples: usize) -> impl Strategy<Value = GraphPattern> {
    let subject = prop_oneof![2 => arb_var(), 1 => arb_node()];
    let predicate = prop_oneof![1 => arb_var(), 3 => arb_predicate()];
    let object = prop_oneof![2 => arb_var(), 1 => arb_object()];
    prop::collection::vec((subject, predicate, object), 1..=max_triples)
        .prop_map(|ts| GraphPattern::new(ts.into_iter().map(|(s, p, o)| Triple::new(s, p, o)).collect()).unwrap())
}

/// Every assignment of pattern variables to graph terms, kept when all
/// instantiated triples are in the graph.
pub fn brute_force(graph: &Graph, pattern: &GraphPattern) -> BTreeSet<Binding> {
    let vars: Vec<Variable> = pattern.variables().into_iter().collect();
    let domain: Vec<Term> = graph.terms().into_iter().cloned().collect();
    let mut out = BTreeSet::new();
    if !vars.is_empty() && domain.is_empty() {
        return out;
    }
    let mut digits = vec![0usize; vars.len()];
    loop {
        let binding: Binding = vars
            .iter()
            .zip(&digits)
            .map(|(v, &d)| (v.clone(), domain[d].clone()))
            .collect();
        if pattern.triples().iter().all(|t| graph.contains(&binding.apply(t))) {
            out.insert(binding);
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return out;
            }
            digits[k] += 1;
            if digits[k] < domain.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// CO and temperature readings on three tunnels, every tunnel typed.
pub fn arb_observations() -> impl Strategy<Value = Graph> {
    let reading = (0..2usize, 1..4u8, 0..12u8);
    prop::collection::vec(reading, 0..10).prop_map(|rs| {
        let mut text = String::from(":t1 rdf:type :Tunnel . :t2 rdf:type :Tunnel . :t3 rdf:type :Tunnel .\n");
        for (i, (prop, tunnel, value)) in rs.into_iter().enumerate() {
            let prop = ["CO", "Temperature"][prop];
            // Coarse values so filters land on boundaries often.
            let value = value as u32 * 10;
            text.push_str(&format!(
                ":o{i} sosa:observedProperty :{prop} ; sosa:hasResult {value} ; sosa:hasFeatureOfInterest :t{tunnel} .\n"
            ));
        }
        ssn_policy_forge::rdf::parse_turtle(&text, &prefixes()).unwrap()
    })
}

pub fn policy_catalog() -> Catalog {
    let p = prefixes();
    let schema = load_declared_schema(
        "?x sosa:observedProperty :CO . ?x sosa:hasResult ?y .\n\
         ?x sosa:hasFeatureOfInterest ?z . ?z rdf:type :Tunnel .\n\
         ?t sosa:observedProperty :Temperature . ?t sosa:hasResult ?v . ?t sosa:hasFeatureOfInterest ?z .\n\
         ?c rdf:type :EvacuateTunnel . ?c :targets ?z .",
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

fn arb_op() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(CmpOp::ALL.to_vec())
}

/// Two observation conditions joined on the tunnel, the reading, or both,
/// one numeric threshold, evacuating the first condition's tunnel.
pub fn arb_two_aca_policy() -> impl Strategy<Value = Policy> {
    let label = prop::sample::select(vec![CO_LABEL, TEMP_LABEL]);
    (
        label.clone(),
        label,
        0..3u8,
        any::<bool>(),
        arb_op(),
        0..13u8,
        any::<bool>(),
    )
        .prop_map(|(first, second, sharing, filter_second, op, threshold, half)| {
            let (a2, b2) = match sharing {
                0 => ("a", "b2"),
                1 => ("a", "b1"),
                _ => ("a2", "b1"),
            };
            let rename = |a: &str, b: &str| -> BTreeMap<Variable, Variable> {
                [(var("a"), var(a)), (var("b"), var(b))].into_iter().collect()
            };
            let filtered = if filter_second { b2 } else { "b1" };
            let value = threshold as f64 * 10.0 + if half { 5.0 } else { 0.0 };
            Policy {
                id: "random".into(),
                name: String::new(),
                condition_acas: vec![
                    ConditionRef {
                        aca: first.into(),
                        rename: rename("a", "b1"),
                    },
                    ConditionRef {
                        aca: second.into(),
                        rename: rename(a2, b2),
                    },
                ],
                comparisons: vec![Comparison {
                    var: var(filtered),
                    op,
                    value: Constant::Number(value),
                }],
                action: ssn_policy_forge::policy::ActionRef {
                    aca: EVACUATE_LABEL.into(),
                    args: [(var("a"), var("a"))].into_iter().collect(),
                },
                enabled: true,
            }
        })
}

fn holds(op: CmpOp, lhs: f64, rhs: f64) -> bool {
    match op {
        CmpOp::Lt => lhs < rhs,
        CmpOp::Le => lhs <= rhs,
        CmpOp::Gt => lhs > rhs,
        CmpOp::Ge => lhs >= rhs,
        CmpOp::Eq => lhs == rhs,
        CmpOp::Ne => lhs != rhs,
    }
}

/// Per-ACA matches renamed to policy variables, natural join, numeric
/// filters, projection onto the action arguments.
pub fn policy_oracle(policy: &Policy, catalog: &Catalog, graph: &Graph) -> BTreeSet<Binding> {
    let mut rows: Vec<BTreeMap<Variable, Term>> = vec![BTreeMap::new()];
    for cond in &policy.condition_acas {
        let aca = catalog.resolve(&cond.aca).expect("known ACA");
        let matches: Vec<BTreeMap<Variable, Term>> = match_bgp(graph, &aca.pattern)
            .into_iter()
            .map(|b| {
                aca.exposed_vars
                    .iter()
                    .map(|v| (cond.rename.get(v).unwrap_or(v).clone(), b.get(v).unwrap().clone()))
                    .collect()
            })
            .collect();
        let mut joined = Vec::new();
        for left in &rows {
            for right in &matches {
                if right.iter().all(|(k, v)| left.get(k).is_none_or(|l| l == v)) {
                    let mut row = left.clone();
                    row.extend(right.clone());
                    joined.push(row);
                }
            }
        }
        rows = joined;
    }
    rows.retain(|row| {
        policy.comparisons.iter().all(|c| {
            let Constant::Number(rhs) = c.value else {
                panic!("oracle handles numeric thresholds only")
            };
            let lhs = row[&c.var].as_literal().and_then(|l| l.as_number()).unwrap();
            holds(c.op, lhs, rhs)
        })
    });
    let projection: Vec<&Variable> = policy.action.args.values().collect();
    rows.iter()
        .map(|row| projection.iter().map(|v| ((*v).clone(), row[*v].clone())).collect())
        .collect()
}

fn arb_rich_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        arb_node(),
        prop::sample::select(vec!["CO", "Tunnel", "obs-261-19", "x_1"]).prop_map(iri),
        prop::sample::select(vec![
            "http://www.w3.org/ns/sosa/hasResult",
            "http://other.example/path/thing",
            "urn:mine:sensor:7",
        ])
        .prop_map(|s| Term::iri(s).unwrap()),
        (-1000i32..1000, 0..3u32).prop_map(|(n, d)| number(n as f64 / 10f64.powi(d as i32))),
        "[ -~]{0,8}".prop_map(|s| Term::Literal(Literal::string(s))),
        Just(Term::Literal(Literal::string("line\nbreak \"quoted\" \\ tab\t"))),
        any::<bool>().prop_map(|b| Term::Literal(Literal::boolean(b))),
    ]
}

/// Compiled queries with assorted terms; filters and projection derived
/// from the pattern so the query is well formed.
pub fn arb_compiled_query() -> impl Strategy<Value = CompiledQuery> {
    let subject = prop_oneof![arb_var(), arb_node()];
    let predicate = prop_oneof![
        1 => arb_var(),
        3 => arb_predicate(),
        1 => Just(Term::iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type").unwrap()),
        1 => Just(Term::iri("http://other.example/p").unwrap()),
    ];
    let object = prop_oneof![arb_var(), arb_rich_term()];
    (
        prop::collection::vec((subject, predicate, object), 1..=6),
        arb_op(),
        any::<bool>(),
    )
        .prop_map(|(ts, op, with_filter)| {
            let pattern = GraphPattern::new(ts.into_iter().map(|(s, p, o)| Triple::new(s, p, o)).collect()).unwrap();
            let vars: Vec<Variable> = pattern.variables().into_iter().collect();
            let filters = match vars.first() {
                Some(v) if with_filter => vec![ssn_policy_forge::policy::Filter {
                    var: v.clone(),
                    op,
                    value: number(50.0),
                }],
                _ => Vec::new(),
            };
            CompiledQuery {
                pattern,
                filters,
                projection: vars.into_iter().take(2).collect(),
                action: ActionSpec {
                    kind: ActuatorKind::EvacuateTunnel,
                    target: None,
                },
                conditions: Vec::new(),
                prefixes: prefixes(),
            }
        })
}
