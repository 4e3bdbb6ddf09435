use std::collections::BTreeSet;
use std::fmt::Write;

use super::CompiledQuery;
use crate::rdf::Term;

/// Render as a SPARQL `SELECT DISTINCT` (or `ASK` when nothing is projected).
///
/// Only prefixes the body actually uses are declared. The lines between
/// the braces that are not `FILTER`s parse back with `parse_pattern`.
pub fn serialize_query(query: &CompiledQuery) -> String {
    let prefixes = &query.prefixes;
    let lines: Vec<String> = query
        .pattern
        .triples()
        .iter()
        .map(|t| prefixes.format_triple(t))
        .collect();
    let filters: Vec<String> = query
        .filters
        .iter()
        .map(|f| format!("FILTER ({} {} {})", f.var, f.op, prefixes.format_term(&f.value)))
        .collect();

    let mut used = BTreeSet::new();
    let terms = query
        .pattern
        .triples()
        .iter()
        .flat_map(|t| t.terms())
        .chain(query.filters.iter().map(|f| &f.value));
    for term in terms {
        if let Term::Iri(iri) = term {
            let compact = prefixes.compact(iri);
            if let Some((prefix, _)) = compact.split_once(':').filter(|_| !compact.starts_with('<')) {
                used.insert(prefix.to_string());
            }
        }
    }

    let mut out = String::new();
    for prefix in &used {
        let ns = prefixes.get(prefix).expect("compacted with this prefix");
        writeln!(out, "PREFIX {prefix}: <{ns}>").unwrap();
    }
    if query.projection.is_empty() {
        out.push_str("ASK\n");
    } else {
        let vars: Vec<String> = query.projection.iter().map(|v| v.to_string()).collect();
        writeln!(out, "SELECT DISTINCT {}", vars.join(" ")).unwrap();
    }
    out.push_str("WHERE {\n");
    for line in lines.iter().chain(&filters) {
        writeln!(out, "  {line}").unwrap();
    }
    out.push_str("}\n");
    out
}

/// The `PREFIX` lines and triple-pattern lines of a serialized query, as a
/// pattern document.
pub fn pattern_block(query_text: &str) -> String {
    let mut out = String::new();
    let mut inside = false;
    for line in query_text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with("PREFIX ") {
            out.push_str(trimmed);
            out.push('\n');
        } else if trimmed.ends_with('{') {
            inside = true;
        } else if trimmed == "}" {
            inside = false;
        } else if inside && !trimmed.starts_with("FILTER") {
            out.push_str(trimmed);
            out.push('\n');
        }
    }
    out
}
