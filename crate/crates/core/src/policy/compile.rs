use std::collections::{BTreeMap, BTreeSet};

use super::validate::resolve;
use super::{ActionSpec, CompiledCondition, CompiledQuery, Policy, PolicyError};
use crate::aca::Catalog;
use crate::rdf::{GraphPattern, Term, Variable};

/// Compile a policy into one conjunctive query.
///
/// Condition patterns are concatenated in order. Exposed variables take
/// their policy-level names; hidden ones are renamed apart per ACA instance
/// (`?s` becomes `?s_1`, `?s_2`, ...). A lone condition keeps its hidden
/// names unless they collide with a policy variable.
pub fn compile_policy(policy: &Policy, catalog: &Catalog) -> Result<CompiledQuery, PolicyError> {
    let resolved = resolve(policy, catalog)?;
    let policy_vars: BTreeSet<Variable> = resolved
        .conditions
        .iter()
        .flat_map(|(_, m)| m.values().cloned())
        .collect();
    let single = resolved.conditions.len() == 1;

    let mut taken = policy_vars.clone();
    let mut patterns = Vec::with_capacity(resolved.conditions.len());
    let mut conditions = Vec::with_capacity(resolved.conditions.len());
    for (index, (aca, exposed_map)) in resolved.conditions.iter().enumerate() {
        let mut renaming: BTreeMap<Variable, Variable> = exposed_map.clone();
        for hidden in aca.hidden_vars() {
            let is_taken = |name: &str| taken.iter().any(|v| v.name() == name);
            let mut candidate = hidden.name().to_string();
            if !single || is_taken(&candidate) {
                candidate = format!("{}_{}", hidden.name(), index + 1);
            }
            while is_taken(&candidate) {
                candidate.push('_');
            }
            let fresh = Variable::new(candidate).expect("valid name");
            taken.insert(fresh.clone());
            renaming.insert(hidden, fresh);
        }
        let pattern = aca
            .pattern
            .map_terms(|t| match t {
                Term::Variable(v) => Term::Variable(renaming.get(v).cloned().unwrap_or_else(|| v.clone())),
                other => other.clone(),
            })
            .expect("renaming keeps a valid pattern");
        patterns.push(pattern);
        conditions.push(CompiledCondition {
            aca: aca.id.clone(),
            vars: exposed_map.clone(),
        });
    }

    let mut projection: Vec<Variable> = Vec::new();
    for v in &resolved.args {
        if !projection.contains(v) {
            projection.push(v.clone());
        }
    }

    Ok(CompiledQuery {
        pattern: GraphPattern::concat(patterns).expect("at least one condition"),
        filters: resolved.filters,
        projection,
        action: ActionSpec {
            kind: resolved.kind,
            target: resolved.target,
        },
        conditions,
        prefixes: catalog.prefixes().clone(),
    })
}
