use std::collections::BTreeSet;

use super::Aca;

fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Keyword search over labels.
///
/// Ranked by number of distinct query tokens found in the label, then by
/// shorter label, then by id. ACAs matching no token are dropped; a query
/// with no tokens returns everything in id order.
pub fn search_acas<'a>(query: &str, catalog: &'a [Aca]) -> Vec<&'a Aca> {
    let wanted = tokens(query);
    if wanted.is_empty() {
        let mut all: Vec<&Aca> = catalog.iter().collect();
        all.sort_by(|a, b| a.id.cmp(&b.id));
        return all;
    }
    let mut hits: Vec<(usize, &Aca)> = catalog
        .iter()
        .filter_map(|aca| {
            let have = tokens(&aca.label);
            let score = wanted.iter().filter(|t| have.contains(*t)).count();
            (score > 0).then_some((score, aca))
        })
        .collect();
    hits.sort_by(|(sa, a), (sb, b)| {
        sb.cmp(sa)
            .then_with(|| a.label.len().cmp(&b.label.len()))
            .then_with(|| a.id.cmp(&b.id))
    });
    hits.into_iter().map(|(_, aca)| aca).collect()
}

#[cfg(test)]
mod tests {
    use super::super::{AcaKind, Provenance};
    use super::*;
    use crate::rdf::{parse_pattern, vocab::DEFAULT_BASE, PrefixMap};

    fn aca(id: &str, label: &str) -> Aca {
        Aca {
            id: id.into(),
            label: label.into(),
            parts: vec![],
            pattern: parse_pattern("?a :p ?b .", &PrefixMap::with_defaults(DEFAULT_BASE)).unwrap(),
            exposed_vars: vec![],
            provenance: Provenance {
                rule_id: "r".into(),
                concepts: Default::default(),
            },
            kind: AcaKind::Observation,
        }
    }

    fn catalog() -> Vec<Aca> {
        vec![
            aca("aca-2", "the temperature of tunnel ?a is ?b"),
            aca("aca-1", "the carbon monoxide concentration of tunnel ?a is ?b"),
        ]
    }

    #[test]
    fn carbon_monoxide_first() {
        let cat = catalog();
        let hits = search_acas("carbon monoxide", &cat);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id, "aca-1");
        let hits = search_acas("Tunnel Carbon", &cat);
        assert_eq!(hits[0].id, "aca-1");
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn empty_query_is_full_catalog_by_id() {
        let cat = catalog();
        let ids: Vec<_> = search_acas("", &cat).iter().map(|a| a.id.as_str()).collect();
        assert_eq!(ids, ["aca-1", "aca-2"]);
        assert_eq!(search_acas("  ?? ", &cat).len(), 2);
    }

    #[test]
    fn no_match() {
        assert!(search_acas("methane", &catalog()).is_empty());
    }

    #[test]
    fn shorter_label_breaks_ties() {
        let cat = catalog();
        let hits = search_acas("tunnel", &cat);
        assert_eq!(hits[0].id, "aca-2");
    }
}
