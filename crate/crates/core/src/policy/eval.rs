use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use super::{ActuatorCommand, CmpOp, CompiledQuery, Filter, Policy};
use crate::rdf::{match_bgp, Binding, Graph, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("filter `{filter}` cannot compare {found}")]
    Incomparable { filter: String, found: String },
}

fn apply_filter(filter: &Filter, term: &Term) -> Result<bool, EvalError> {
    let incomparable = || EvalError::Incomparable {
        filter: filter.to_string(),
        found: term.to_string(),
    };
    let lhs = term.as_literal().and_then(|l| l.as_number());
    let rhs = filter.value.as_literal().and_then(|l| l.as_number());
    if let (Some(a), Some(b)) = (lhs, rhs) {
        let ord = a.partial_cmp(&b).ok_or_else(incomparable)?;
        return Ok(match filter.op {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
        });
    }
    match filter.op {
        CmpOp::Eq => Ok(term == &filter.value),
        CmpOp::Ne => Ok(term != &filter.value),
        _ => Err(incomparable()),
    }
}

/// Pattern matches that pass every filter, before projection.
pub fn evaluate_unprojected(query: &CompiledQuery, graph: &Graph) -> Result<BTreeSet<Binding>, EvalError> {
    let mut out = BTreeSet::new();
    'bindings: for binding in match_bgp(graph, &query.pattern) {
        for filter in &query.filters {
            let Some(term) = binding.get(&filter.var) else {
                continue 'bindings;
            };
            if !apply_filter(filter, term)? {
                continue 'bindings;
            }
        }
        out.insert(binding);
    }
    Ok(out)
}

/// Matches, filtered, projected onto the action variables.
pub fn evaluate(query: &CompiledQuery, graph: &Graph) -> Result<BTreeSet<Binding>, EvalError> {
    Ok(evaluate_unprojected(query, graph)?
        .iter()
        .map(|b| b.project(&query.projection))
        .collect())
}

/// One command per distinct (kind, target) among the results.
pub fn action_instances(
    policy: &Policy,
    query: &CompiledQuery,
    results: &BTreeSet<Binding>,
    tick: u64,
) -> Vec<ActuatorCommand> {
    let kind = query.action.kind;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for binding in results {
        let target = match (&query.action.target, kind.is_targeted()) {
            (Some(var), true) => match binding.get(var) {
                Some(Term::Iri(iri)) => Some(iri.local_name().to_string()),
                Some(Term::Literal(lit)) => Some(lit.lexical().to_string()),
                _ => continue,
            },
            _ => None,
        };
        if seen.insert((kind, target.clone())) {
            out.push(ActuatorCommand {
                kind,
                target,
                source_policy: policy.id.clone(),
                tick,
            });
        }
    }
    out
}
