use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AcaError;
use crate::rdf::{parse_pattern, GraphPattern, PrefixMap, Variable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcaKind {
    Observation,
    Actuation,
}

/// One piece of a label template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelToken {
    Text(String),
    Concept(String),
    Var(String),
}

/// A domain-agnostic rule: a body pattern whose concept slots bind to
/// schema constants, plus the label template for the ACAs it yields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregationRule {
    id: String,
    kind: AcaKind,
    body: GraphPattern,
    concept_slots: Vec<Variable>,
    instance_vars: Vec<Variable>,
    exposed_vars: Vec<Variable>,
    label_template: Vec<LabelToken>,
}

impl AggregationRule {
    pub fn new(
        id: impl Into<String>,
        kind: AcaKind,
        body: GraphPattern,
        concept_slots: Vec<Variable>,
        instance_vars: Vec<Variable>,
        exposed_vars: Vec<Variable>,
        label_template: Vec<LabelToken>,
    ) -> Result<Self, AcaError> {
        let rule = AggregationRule {
            id: id.into(),
            kind,
            body,
            concept_slots,
            instance_vars,
            exposed_vars,
            label_template,
        };
        rule.validate()?;
        Ok(rule)
    }

    fn invalid(&self, reason: impl Into<String>) -> AcaError {
        AcaError::InvalidRule {
            rule: self.id.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self) -> Result<(), AcaError> {
        if self.id.is_empty() {
            return Err(self.invalid("empty rule id"));
        }
        let body_vars = self.body.variables();
        let slots: BTreeSet<&Variable> = self.concept_slots.iter().collect();
        let instances: BTreeSet<&Variable> = self.instance_vars.iter().collect();
        if let Some(v) = slots.intersection(&instances).next() {
            return Err(self.invalid(format!("?{} is both a concept slot and an instance variable", v.name())));
        }
        for v in slots.iter().chain(instances.iter()) {
            if !body_vars.contains(v) {
                return Err(self.invalid(format!("?{} does not occur in the body", v.name())));
            }
        }
        for v in &body_vars {
            if !slots.contains(v) && !instances.contains(v) {
                return Err(self.invalid(format!("body variable ?{} is not declared", v.name())));
            }
        }
        for v in &self.exposed_vars {
            if !instances.contains(v) {
                return Err(self.invalid(format!("exposed ?{} is not an instance variable", v.name())));
            }
        }
        for tok in &self.label_template {
            match tok {
                LabelToken::Concept(s) if !slots.iter().any(|v| v.name() == s) => {
                    return Err(self.invalid(format!("template references unknown concept slot {s}")));
                }
                LabelToken::Var(s) if !instances.iter().any(|v| v.name() == s) => {
                    return Err(self.invalid(format!("template references unknown instance variable {s}")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> AcaKind {
        self.kind
    }

    pub fn body(&self) -> &GraphPattern {
        &self.body
    }

    pub fn concept_slots(&self) -> &[Variable] {
        &self.concept_slots
    }

    pub fn instance_vars(&self) -> &[Variable] {
        &self.instance_vars
    }

    pub fn exposed_vars(&self) -> &[Variable] {
        &self.exposed_vars
    }

    pub fn label_template(&self) -> &[LabelToken] {
        &self.label_template
    }
}

/// JSON form of one rule; `body` is pattern text.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleDoc {
    pub id: String,
    pub kind: AcaKind,
    pub body: String,
    pub concept_slots: Vec<String>,
    pub instance_vars: Vec<String>,
    pub exposed_vars: Vec<String>,
    pub label_template: Vec<LabelToken>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(default)]
    pub prefixes: BTreeMap<String, String>,
    pub rules: Vec<RuleDoc>,
}

impl RuleDoc {
    pub fn into_rule(self, prefixes: &PrefixMap) -> Result<AggregationRule, AcaError> {
        let invalid = |reason: String| AcaError::InvalidRule {
            rule: self.id.clone(),
            reason,
        };
        let body = parse_pattern(&self.body, prefixes).map_err(|e| invalid(e.to_string()))?;
        let vars = |names: &[String]| -> Result<Vec<Variable>, AcaError> {
            names
                .iter()
                .map(|n| Variable::new(n.trim_start_matches('?')).map_err(|e| invalid(e.to_string())))
                .collect()
        };
        AggregationRule::new(
            self.id.clone(),
            self.kind,
            body,
            vars(&self.concept_slots)?,
            vars(&self.instance_vars)?,
            vars(&self.exposed_vars)?,
            self.label_template.clone(),
        )
    }
}

/// Parse a rule file (JSON). Accepts `{"prefixes": {...}, "rules": [...]}`
/// or a bare array of rules.
pub fn parse_rule_file(json: &str, base_prefixes: &PrefixMap) -> Result<Vec<AggregationRule>, AcaError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        File(RuleFile),
        Bare(Vec<RuleDoc>),
    }
    let file = match serde_json::from_str::<Doc>(json).map_err(|e| AcaError::RuleFile(e.to_string()))? {
        Doc::File(f) => f,
        Doc::Bare(rules) => RuleFile {
            rules,
            ..Default::default()
        },
    };
    let mut prefixes = base_prefixes.clone();
    for (k, v) in &file.prefixes {
        prefixes.insert(k.trim_end_matches(':'), v.clone());
    }
    let mut seen = BTreeSet::new();
    let mut rules = Vec::with_capacity(file.rules.len());
    for doc in file.rules {
        if !seen.insert(doc.id.clone()) {
            return Err(AcaError::DuplicateRule(doc.id));
        }
        rules.push(doc.into_rule(&prefixes)?);
    }
    Ok(rules)
}
