use std::collections::{BTreeMap, BTreeSet};

use super::{ActuatorKind, Constant, Diagnostic, DiagnosticCode, Filter, Policy, PolicyError};
use crate::aca::{Aca, AcaKind, Catalog};
use crate::rdf::{Iri, Literal, PrefixMap, Term, Variable};

/// A policy with every reference looked up in the catalog.
pub(super) struct Resolved<'a> {
    /// Condition ACAs with their full exposed-variable → policy-variable map.
    pub conditions: Vec<(&'a Aca, BTreeMap<Variable, Variable>)>,
    pub filters: Vec<Filter>,
    pub kind: ActuatorKind,
    /// Policy variables feeding the action, in the action ACA's exposed order.
    pub args: Vec<Variable>,
    pub target: Option<Variable>,
}

pub(super) fn resolve_constant(value: &Constant, prefixes: &PrefixMap) -> Result<Term, String> {
    match value {
        Constant::Number(n) => Literal::number(*n).map(Term::Literal).map_err(|e| e.to_string()),
        Constant::Iri(text) => prefixes
            .expand_curie(text)
            .and_then(|iri| Iri::new(iri).ok())
            .map(Term::Iri)
            .ok_or_else(|| format!("invalid constant {text:?}")),
    }
}

pub(super) fn resolve<'a>(policy: &Policy, catalog: &'a Catalog) -> Result<Resolved<'a>, PolicyError> {
    use DiagnosticCode::*;
    let mut diags = Vec::new();

    if policy.id.trim().is_empty() {
        diags.push(Diagnostic::new(EmptyId, "policy id is empty"));
    }
    if policy.condition_acas.is_empty() {
        diags.push(Diagnostic::new(NoConditions, "policy has no condition"));
    }

    let mut conditions = Vec::new();
    for cond in &policy.condition_acas {
        let Some(aca) = catalog.resolve(&cond.aca) else {
            diags.push(Diagnostic::new(UnknownAca, format!("unknown ACA id {}", cond.aca)));
            continue;
        };
        if aca.kind != AcaKind::Observation {
            diags.push(Diagnostic::new(
                WrongAcaKind,
                format!("condition ACA {} is an actuation ACA", aca.id),
            ));
            continue;
        }
        for from in cond.rename.keys() {
            if !aca.exposes(from.name()) {
                diags.push(Diagnostic::new(
                    UnknownVariable,
                    format!("ACA {} does not expose variable {}", aca.id, from.name()),
                ));
            }
        }
        let map: BTreeMap<Variable, Variable> = aca
            .exposed_vars
            .iter()
            .map(|v| (v.clone(), cond.rename.get(v).unwrap_or(v).clone()))
            .collect();
        conditions.push((aca, map));
    }

    let policy_vars: BTreeSet<&Variable> = conditions.iter().flat_map(|(_, m)| m.values()).collect();
    let unbound = |v: &Variable| Diagnostic::new(UnboundVariable, format!("unbound variable {}", v.name()));

    let mut filters = Vec::new();
    for cmp in &policy.comparisons {
        if !policy_vars.contains(&cmp.var) {
            diags.push(unbound(&cmp.var));
        }
        match resolve_constant(&cmp.value, catalog.prefixes()) {
            Ok(value) => filters.push(Filter {
                var: cmp.var.clone(),
                op: cmp.op,
                value,
            }),
            Err(msg) => diags.push(Diagnostic::new(InvalidConstant, msg)),
        }
    }

    let mut kind = None;
    let mut args = Vec::new();
    let mut target = None;
    match catalog.resolve(&policy.action.aca) {
        None => diags.push(Diagnostic::new(
            UnknownAca,
            format!("unknown ACA id {}", policy.action.aca),
        )),
        Some(aca) if aca.kind != AcaKind::Actuation => diags.push(Diagnostic::new(
            WrongAcaKind,
            format!("action ACA {} is not an actuation ACA", aca.id),
        )),
        Some(aca) => {
            let actuator = aca.provenance.concepts.values().find_map(ActuatorKind::from_class);
            match actuator {
                None => diags.push(Diagnostic::new(
                    UnsupportedActuator,
                    format!("ACA {} does not name a supported actuator", aca.id),
                )),
                Some(k) => kind = Some(k),
            }
            for from in policy.action.args.keys() {
                if !aca.exposes(from.name()) {
                    diags.push(Diagnostic::new(
                        UnknownVariable,
                        format!("ACA {} does not expose variable {}", aca.id, from.name()),
                    ));
                }
            }
            let targeted = kind.is_some_and(ActuatorKind::is_targeted);
            for exposed in &aca.exposed_vars {
                let explicit = policy.action.args.get(exposed);
                let source = explicit.unwrap_or(exposed);
                if policy_vars.contains(source) {
                    args.push(source.clone());
                } else if explicit.is_some() || targeted {
                    diags.push(unbound(source));
                }
            }
            if targeted {
                target = args.first().cloned();
                if target.is_none() && aca.exposed_vars.is_empty() {
                    diags.push(Diagnostic::new(
                        MissingTarget,
                        format!("action ACA {} has no variable to carry the target", aca.id),
                    ));
                }
            }
        }
    }

    if conditions.len() > 1 && !is_connected(&conditions) {
        diags.push(Diagnostic::new(
            DisconnectedCondition,
            "disconnected condition: condition ACAs share no variables",
        ));
    }

    if diags.is_empty() {
        Ok(Resolved {
            conditions,
            filters,
            kind: kind.expect("no diagnostics implies a kind"),
            args,
            target,
        })
    } else {
        Err(PolicyError(diags))
    }
}

fn is_connected(conditions: &[(&Aca, BTreeMap<Variable, Variable>)]) -> bool {
    let vars: Vec<BTreeSet<&Variable>> = conditions.iter().map(|(_, m)| m.values().collect()).collect();
    let mut reached = vec![false; vars.len()];
    let mut stack = vec![0usize];
    reached[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..vars.len() {
            if !reached[j] && !vars[i].is_disjoint(&vars[j]) {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    reached.into_iter().all(|r| r)
}

/// Check a policy against the catalog; diagnostics name each violation.
pub fn validate_policy(policy: &Policy, catalog: &Catalog) -> Result<(), PolicyError> {
    resolve(policy, catalog).map(|_| ())
}
