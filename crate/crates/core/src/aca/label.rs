use super::{Aca, AcaError, LabelPart};
use crate::rdf::{vocab, Binding, Graph, Iri, LiteralKind, Term};

/// `rdfs:label` of the IRI if the names graph has one, else its local name
/// split on case boundaries and lowercased.
pub fn human_name(iri: &Iri, names: &Graph) -> String {
    let subject = Term::Iri(iri.clone());
    let mut labels: Vec<_> = names
        .objects(&subject, vocab::RDFS_LABEL)
        .filter_map(Term::as_literal)
        .collect();
    labels.sort_by_key(|l| l.kind() != LiteralKind::String);
    match labels.first() {
        Some(l) => l.lexical().to_string(),
        None => split_local_name(iri.local_name()),
    }
}

/// `GasLeakAlarm` -> `gas leak alarm`, `HTTPServer` -> `http server`.
pub fn split_local_name(local: &str) -> String {
    let chars: Vec<char> = local.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                words.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words.join(" ")
}

fn display(term: &Term, names: &Graph) -> String {
    match term {
        Term::Iri(iri) => human_name(iri, names),
        Term::Literal(lit) => lit.lexical().to_string(),
        Term::Variable(v) => v.to_string(),
    }
}

/// The ACA label, with placeholders filled from `binding` when given.
pub fn render_label(aca: &Aca, binding: Option<&Binding>, names: &Graph) -> Result<String, AcaError> {
    let Some(binding) = binding else {
        return Ok(aca.label.clone());
    };
    if let Some(missing) = aca.exposed_vars.iter().find(|v| binding.get(v).is_none()) {
        return Err(AcaError::MissingVariable(missing.name().to_string()));
    }
    let mut out = String::new();
    for part in &aca.parts {
        match part {
            LabelPart::Text(s) => out.push_str(s),
            LabelPart::Var(v) => {
                let term = binding
                    .get(v)
                    .ok_or_else(|| AcaError::MissingVariable(v.name().to_string()))?;
                out.push_str(&display(term, names));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{AcaKind, Provenance};
    use super::*;
    use crate::rdf::{parse_pattern, parse_turtle, vocab::DEFAULT_BASE, PrefixMap, Variable};

    fn prefixes() -> PrefixMap {
        PrefixMap::with_defaults(DEFAULT_BASE)
    }

    fn iri(local: &str) -> Iri {
        Iri::new(format!("{DEFAULT_BASE}{local}")).unwrap()
    }

    fn var(n: &str) -> Variable {
        Variable::new(n).unwrap()
    }

    fn co_aca() -> Aca {
        Aca {
            id: "aca-test".into(),
            label: "the carbon monoxide concentration of tunnel ?a is ?b".into(),
            parts: vec![
                LabelPart::Text("the carbon monoxide concentration of tunnel ".into()),
                LabelPart::Var(var("a")),
                LabelPart::Text(" is ".into()),
                LabelPart::Var(var("b")),
            ],
            pattern: parse_pattern(
                "?s sosa:observedProperty :CO . ?s sosa:hasResult ?b . ?s sosa:hasFeatureOfInterest ?a . ?a a :Tunnel .",
                &prefixes(),
            )
            .unwrap(),
            exposed_vars: vec![var("a"), var("b")],
            provenance: Provenance {
                rule_id: "r".into(),
                concepts: Default::default(),
            },
            kind: AcaKind::Observation,
        }
    }

    #[test]
    fn human_names() {
        let names = parse_turtle(":CO rdfs:label \"carbon monoxide concentration\" .", &prefixes()).unwrap();
        assert_eq!(human_name(&iri("CO"), &names), "carbon monoxide concentration");
        assert_eq!(human_name(&iri("Tunnel"), &names), "tunnel");
        assert_eq!(human_name(&iri("GasLeakAlarm"), &names), "gas leak alarm");
    }

    #[test]
    fn case_splitting() {
        assert_eq!(split_local_name("HTTPServer"), "http server");
        assert_eq!(split_local_name("CO"), "co");
        assert_eq!(split_local_name("t1"), "t1");
        assert_eq!(split_local_name("sensor2Reading"), "sensor2 reading");
        assert_eq!(split_local_name("evacuate_tunnel"), "evacuate tunnel");
    }

    #[test]
    fn render_without_binding() {
        let aca = co_aca();
        assert_eq!(
            render_label(&aca, None, &Graph::new()).unwrap(),
            "the carbon monoxide concentration of tunnel ?a is ?b"
        );
    }

    #[test]
    fn render_with_binding() {
        let names = parse_turtle(":t1 rdfs:label \"T1\" .", &prefixes()).unwrap();
        let b: Binding = [
            (var("a"), Term::Iri(iri("t1"))),
            (var("b"), Term::number(55.0).unwrap()),
        ]
        .into_iter()
        .collect();
        let out = render_label(&co_aca(), Some(&b), &names).unwrap();
        assert_eq!(out, "the carbon monoxide concentration of tunnel T1 is 55");
        assert!(!out.contains('?'));
    }

    #[test]
    fn partial_binding_names_missing_var() {
        let b: Binding = [(var("a"), Term::Iri(iri("t1")))].into_iter().collect();
        assert_eq!(
            render_label(&co_aca(), Some(&b), &Graph::new()),
            Err(AcaError::MissingVariable("b".into()))
        );
    }

    #[test]
    fn zero_exposed_vars() {
        let mut aca = co_aca();
        aca.label = "evacuate mine".into();
        aca.parts = vec![LabelPart::Text("evacuate mine".into())];
        aca.exposed_vars.clear();
        let b: Binding = [(var("a"), Term::Iri(iri("t1")))].into_iter().collect();
        assert_eq!(render_label(&aca, Some(&b), &Graph::new()).unwrap(), "evacuate mine");
    }
}
