use std::collections::{BTreeSet, HashMap};

use super::{Binding, Graph, GraphPattern, Term, Triple};

/// Unify one pattern triple with a ground triple, extending `binding`.
/// Returns `None` on a clash.
pub fn matches_triple(pattern: &Triple, ground: &Triple, binding: &Binding) -> Option<Binding> {
    if !compatible(pattern, ground, binding) {
        return None;
    }
    let mut out = binding.clone();
    for (p, g) in pattern.terms().into_iter().zip(ground.terms()) {
        if let Term::Variable(v) = p {
            if out.get(v).is_none() {
                out.insert(v.clone(), g.clone());
            }
        }
    }
    Some(out)
}

/// `matches_triple(..).is_some()` without building the extended binding.
fn compatible(pattern: &Triple, ground: &Triple, binding: &Binding) -> bool {
    let terms = pattern.terms();
    let grounds = ground.terms();
    for i in 0..3 {
        let g = grounds[i];
        match terms[i] {
            Term::Variable(v) => {
                if let Some(bound) = binding.get(v) {
                    if bound != g {
                        return false;
                    }
                }
                // A variable repeated inside one triple must see equal terms.
                for j in 0..i {
                    if terms[j] == terms[i] && grounds[j] != g {
                        return false;
                    }
                }
            }
            constant => {
                if constant != g {
                    return false;
                }
            }
        }
    }
    true
}

/// Triples by subject, predicate and object, for candidate lookup.
struct Index<'g> {
    all: Vec<&'g Triple>,
    by_position: [HashMap<&'g Term, Vec<&'g Triple>>; 3],
}

impl<'g> Index<'g> {
    fn new(graph: &'g Graph) -> Self {
        let mut by_position: [HashMap<&Term, Vec<&Triple>>; 3] = Default::default();
        let all: Vec<&Triple> = graph.iter().collect();
        for t in &all {
            for (i, term) in t.terms().into_iter().enumerate() {
                by_position[i].entry(term).or_default().push(t);
            }
        }
        Index { all, by_position }
    }

    /// Smallest list that must contain every match of `pattern`.
    fn candidates(&self, pattern: &Triple) -> &[&'g Triple] {
        let mut best: &[&Triple] = &self.all;
        for (i, term) in pattern.terms().into_iter().enumerate() {
            if term.is_variable() {
                continue;
            }
            match self.by_position[i].get(term) {
                Some(list) if list.len() < best.len() => best = list,
                Some(_) => {}
                None => return &[],
            }
        }
        best
    }
}

/// All bindings of the pattern's variables under which every triple
/// pattern lands in `graph`.
///
/// Triple patterns are joined in ascending order of their standalone
/// candidate counts; ties keep statement order.
pub fn match_bgp(graph: &Graph, pattern: &GraphPattern) -> BTreeSet<Binding> {
    let index = Index::new(graph);
    let empty = Binding::new();
    let mut order: Vec<(usize, &Triple)> = pattern
        .triples()
        .iter()
        .map(|tp| {
            let candidates = index
                .candidates(tp)
                .iter()
                .filter(|g| compatible(tp, g, &empty))
                .count();
            (candidates, tp)
        })
        .collect();
    order.sort_by_key(|(count, _)| *count);

    let mut results = BTreeSet::new();
    if order.first().is_some_and(|(count, _)| *count == 0) {
        return results;
    }
    let ordered: Vec<&Triple> = order.into_iter().map(|(_, tp)| tp).collect();
    join(&index, &ordered, empty, &mut results);
    results
}

fn join(index: &Index<'_>, remaining: &[&Triple], binding: Binding, out: &mut BTreeSet<Binding>) {
    let Some((first, rest)) = remaining.split_first() else {
        out.insert(binding);
        return;
    };
    let bound = binding.apply(first);
    for ground in index.candidates(&bound) {
        if let Some(next) = matches_triple(&bound, ground, &binding) {
            join(index, rest, next, out);
        }
    }
}
