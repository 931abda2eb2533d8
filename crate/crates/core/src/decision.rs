//! Graph equivalence and simple entailment.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::delta::{delta_mapped, delta_plain, Direction};
use crate::equiv::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::matcher::{joint_signatures, solve_bm, BnodeMapping, MatcherConfig, Method};
use crate::rdf::{Graph, Renaming, Term, Triple};

/// Search nodes the entailment backtracking may expand by default.
pub const DEFAULT_ENTAILMENT_BUDGET: u64 = 10_000_000;

/// Is there a bijection between the blank nodes that maps one graph
/// exactly onto the other?
pub fn test_equivalence(g1: &Graph, g2: &Graph) -> bool {
    equivalence_witness(g1, g2).is_some()
}

/// The bijection proving `g1 ≡ g2`, if one exists.
pub fn equivalence_witness(g1: &Graph, g2: &Graph) -> Option<BnodeMapping> {
    let (b1, b2) = (g1.bnodes(), g2.bnodes());
    if g1.len() != g2.len() || b1.len() != b2.len() || g1.iris() != g2.iris() || g1.literals() != g2.literals() {
        return None;
    }
    let rel = EquivalenceRelation::exact();
    let m = solve_bm(g1, g2, &rel, &MatcherConfig::default());
    if m.cost() == 0 && m.len() == b1.len() {
        let d = delta_mapped(g1, g2, &m, Direction::ForwardIntoTargetLabels).ok()?;
        if d.is_empty() {
            return Some(m);
        }
    }
    if m.method().is_exact() {
        return None;
    }
    isomorphism_search(g1, g2)
}

/// Backtracking over colour classes; complete, exponential in the worst case.
fn isomorphism_search(g1: &Graph, g2: &Graph) -> Option<BnodeMapping> {
    let rel = EquivalenceRelation::exact();
    let rounds = g1.bnodes().len() * 2 + 1;
    let (ls, rs) = joint_signatures(g1, g2, &rel, rounds);
    let mut left_colors: Vec<&String> = ls.values().map(|s| &s.color).collect();
    let mut right_colors: Vec<&String> = rs.values().map(|s| &s.color).collect();
    left_colors.sort();
    right_colors.sort();
    if left_colors != right_colors {
        return None;
    }
    let mut by_color: HashMap<&str, Vec<Term>> = HashMap::new();
    for (b, s) in &rs {
        by_color.entry(s.color.as_str()).or_default().push(b.clone());
    }
    let order = search_order(g1, |b| by_color[ls[b].color.as_str()].len());
    let candidates: Vec<Vec<Term>> = order.iter().map(|b| by_color[ls[b].color.as_str()].clone()).collect();
    let target: HashSet<&Triple> = g2.iter().collect();

    struct Search<'a> {
        g1: &'a Graph,
        order: Vec<Term>,
        candidates: Vec<Vec<Term>>,
        target: HashSet<&'a Triple>,
        map: BTreeMap<Term, Term>,
        used: HashSet<Term>,
    }
    fn go(s: &mut Search, depth: usize) -> bool {
        if depth == s.order.len() {
            return true;
        }
        let b = s.order[depth].clone();
        for c in s.candidates[depth].clone() {
            if s.used.contains(&c) {
                continue;
            }
            s.map.insert(b.clone(), c.clone());
            if consistent(s.g1, &b, &s.map, |t| s.target.contains(t)) {
                s.used.insert(c.clone());
                if go(s, depth + 1) {
                    return true;
                }
                s.used.remove(&c);
            }
            s.map.remove(&b);
        }
        false
    }
    let mut s = Search {
        g1,
        order,
        candidates,
        target,
        map: BTreeMap::new(),
        used: HashSet::new(),
    };
    if !go(&mut s, 0) {
        return None;
    }
    let m = BnodeMapping::from_pairs(s.map, 0, Method::BruteForce).ok()?;
    let d = delta_mapped(g1, g2, &m, Direction::ForwardIntoTargetLabels).ok()?;
    d.is_empty().then_some(m)
}

/// Component by component: the node with the fewest candidates first, then
/// repeatedly the unvisited node with the most already ordered neighbours.
fn search_order(g: &Graph, candidate_count: impl Fn(&Term) -> usize) -> Vec<Term> {
    let mut neighbors: HashMap<Term, BTreeSet<Term>> = HashMap::new();
    for t in g {
        if t.subject().is_blank() && t.object().is_blank() && t.subject() != t.object() {
            neighbors.entry(t.subject().clone()).or_default().insert(t.object().clone());
            neighbors.entry(t.object().clone()).or_default().insert(t.subject().clone());
        }
    }
    let mut order = Vec::new();
    for component in g.bnode_components() {
        let mut rest: BTreeSet<Term> = component.into_iter().collect();
        let mut placed: HashSet<Term> = HashSet::new();
        while !rest.is_empty() {
            let next = rest
                .iter()
                .min_by_key(|b| {
                    let linked = neighbors.get(*b).map_or(0, |n| n.iter().filter(|x| placed.contains(*x)).count());
                    (usize::MAX - linked, candidate_count(b))
                })
                .cloned()
                .expect("non-empty");
            rest.remove(&next);
            placed.insert(next.clone());
            order.push(next);
        }
    }
    order
}

/// Every triple of `b` whose blank nodes are all assigned maps into the target.
fn consistent(g: &Graph, b: &Term, map: &BTreeMap<Term, Term>, present: impl Fn(&Triple) -> bool) -> bool {
    let Ok(rows) = g.triples_of(b) else {
        return false;
    };
    for t in rows {
        let image = |x: &Term| -> Option<Term> {
            if x.is_blank() {
                map.get(x).cloned()
            } else {
                Some(x.clone())
            }
        };
        let (Some(s), Some(o)) = (image(t.subject()), image(t.object())) else {
            continue;
        };
        match Triple::new(s, t.predicate().clone(), o) {
            Ok(mapped) if present(&mapped) => {}
            _ => return false,
        }
    }
    true
}

/// A function from the blank nodes of an entailed graph to blank nodes or
/// IRIs of the entailing graph. Neither injective nor surjective in general.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntailmentMapping {
    assignments: BTreeMap<Term, Term>,
}

impl EntailmentMapping {
    pub fn from_pairs<I>(pairs: I) -> Result<EntailmentMapping>
    where
        I: IntoIterator<Item = (Term, Term)>,
    {
        let mut assignments = BTreeMap::new();
        for (b, x) in pairs {
            if !b.is_blank() {
                return Err(Error::NotABlankNode(b));
            }
            if x.is_literal() {
                return Err(Error::LiteralInRenaming(x));
            }
            assignments.insert(b, x);
        }
        Ok(EntailmentMapping { assignments })
    }

    pub fn assignments(&self) -> &BTreeMap<Term, Term> {
        &self.assignments
    }

    pub fn get(&self, b: &Term) -> Option<&Term> {
        self.assignments.get(b)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn to_renaming(&self) -> Renaming {
        Renaming::from_pairs(self.assignments.iter().map(|(a, b)| (a.clone(), b.clone())))
            .expect("checked on construction")
    }

    /// One `M <label> <term>` line per assignment; IRIs in angle brackets.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (b, x) in &self.assignments {
            let image = match x {
                Term::Blank(l) => l.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("M {} {}\n", b.value(), image));
        }
        out
    }
}

/// `(G2 # m) ⊆ G1`, i.e. the delta from the renamed `g2` to `g1` has no
/// deletions. A mapping that misses a blank node of `g2` is rejected.
pub fn verify_entailment_mapping(g1: &Graph, g2: &Graph, m: &EntailmentMapping) -> bool {
    if g2.bnodes().iter().any(|b| m.get(b).is_none()) {
        return false;
    }
    let renamed = g2.rename(&m.to_renaming());
    delta_plain(&renamed, g1).deletions().is_empty()
}

/// Does `g1` entail `g2`? Returns a witness mapping on success.
pub fn test_entailment(g1: &Graph, g2: &Graph) -> Result<Option<EntailmentMapping>> {
    test_entailment_with_budget(g1, g2, DEFAULT_ENTAILMENT_BUDGET)
}

pub fn test_entailment_with_budget(g1: &Graph, g2: &Graph, budget: u64) -> Result<Option<EntailmentMapping>> {
    if g2.ground_triples().any(|t| !g1.contains(t)) {
        return Ok(None);
    }
    let mut by_pred: HashMap<&Term, Vec<&Triple>> = HashMap::new();
    for t in g1 {
        by_pred.entry(t.predicate()).or_default().push(t);
    }
    let pool: Vec<Term> = g1.bnodes().into_iter().chain(g1.iris()).collect();

    let mut candidates: HashMap<Term, Vec<Term>> = HashMap::new();
    for b in g2.bnodes() {
        let rows = g2.triples_of(&b)?;
        let fits = |x: &Term| {
            rows.iter().all(|t| {
                let want = |term: &Term| -> Option<Term> {
                    if term == &b {
                        Some(x.clone())
                    } else if term.is_blank() {
                        None
                    } else {
                        Some(term.clone())
                    }
                };
                let (s, o) = (want(t.subject()), want(t.object()));
                by_pred.get(t.predicate()).map_or(false, |cands| {
                    cands.iter().any(|c| {
                        s.as_ref().map_or(true, |s| c.subject() == s) && o.as_ref().map_or(true, |o| c.object() == o)
                    })
                })
            })
        };
        let cands: Vec<Term> = pool.iter().filter(|x| fits(x)).cloned().collect();
        if cands.is_empty() {
            return Ok(None);
        }
        candidates.insert(b, cands);
    }

    let order = search_order(g2, |b| candidates[b].len());
    let mut expanded = 0u64;
    let mut map: BTreeMap<Term, Term> = BTreeMap::new();
    let components = g2.bnode_components();
    let mut start = 0;
    for component in components {
        let nodes = &order[start..start + component.len()];
        start += component.len();
        let found = extend(g1, g2, nodes, 0, &candidates, &mut map, &mut expanded, budget)?;
        if !found {
            return Ok(None);
        }
    }
    let m = EntailmentMapping::from_pairs(map)?;
    debug_assert!(verify_entailment_mapping(g1, g2, &m));
    Ok(Some(m))
}

#[allow(clippy::too_many_arguments)]
fn extend(
    g1: &Graph,
    g2: &Graph,
    nodes: &[Term],
    depth: usize,
    candidates: &HashMap<Term, Vec<Term>>,
    map: &mut BTreeMap<Term, Term>,
    expanded: &mut u64,
    budget: u64,
) -> Result<bool> {
    if depth == nodes.len() {
        return Ok(true);
    }
    let b = &nodes[depth];
    for x in &candidates[b] {
        *expanded += 1;
        if *expanded > budget {
            return Err(Error::BudgetExhausted(budget));
        }
        map.insert(b.clone(), x.clone());
        if consistent(g2, b, map, |t| g1.contains(t)) && extend(g1, g2, nodes, depth + 1, candidates, map, expanded, budget)? {
            return Ok(true);
        }
        map.remove(b);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_str;

    fn g(src: &str) -> Graph {
        parse_str(src).unwrap().graph
    }

    const ANDRE_G1: &str = "<http://Andre> <http://name> \"Andre\" .\n\
        <http://Andre> <http://surname> \"Smith\" .\n\
        _:1 <http://name> \"Natalie\" .\n";
    const ANDRE_G2: &str = "_:2 <http://name> \"Andre\" .\n_:3 <http://surname> \"Smith\" .\n";

    #[test]
    fn andre_entailment() {
        let (g1, g2) = (g(ANDRE_G1), g(ANDRE_G2));
        let m = test_entailment(&g1, &g2).unwrap().expect("entailed");
        assert!(verify_entailment_mapping(&g1, &g2, &m));
        assert_eq!(m.get(&Term::blank("2")), Some(&Term::iri("http://Andre")));
        assert!(test_entailment(&g2, &g1).unwrap().is_none());
    }

    #[test]
    fn wrong_witness_rejected() {
        let (g1, g2) = (g(ANDRE_G1), g(ANDRE_G2));
        let bad = EntailmentMapping::from_pairs([
            (Term::blank("2"), Term::blank("1")),
            (Term::blank("3"), Term::iri("http://Andre")),
        ])
        .unwrap();
        assert!(!verify_entailment_mapping(&g1, &g2, &bad));
        assert!(EntailmentMapping::from_pairs([(Term::blank("2"), Term::literal("x"))]).is_err());
    }

    #[test]
    fn ground_graph_entailment() {
        let g1 = g("<http://s> <http://p> \"x\" .\n<http://s> <http://p> \"y\" .");
        let g2 = g("<http://s> <http://p> \"x\" .");
        let m = test_entailment(&g1, &g2).unwrap().unwrap();
        assert!(m.is_empty());
        assert!(verify_entailment_mapping(&g1, &g2, &m));
    }

    #[test]
    fn self_loop_needs_self_loop() {
        let g1 = g("_:a <http://p> _:b .");
        let g2 = g("_:x <http://p> _:x .");
        assert!(test_entailment(&g1, &g2).unwrap().is_none());
        assert!(test_entailment(&g2, &g1).unwrap().is_some());
    }

    #[test]
    fn budget_is_enforced() {
        let mut a = String::new();
        let mut b = String::new();
        for i in 0..6 {
            a.push_str(&format!("_:a{i} <http://p> _:a{} .\n", (i + 1) % 6));
            b.push_str(&format!("_:b{i} <http://p> _:b{} .\n", (i + 1) % 7));
        }
        b.push_str("_:b6 <http://p> _:b0 .\n");
        // a 6-cycle does not map homomorphically into a 7-cycle
        let r = test_entailment_with_budget(&g(&b), &g(&a), 3);
        assert!(matches!(r, Err(Error::BudgetExhausted(3))));
        assert!(test_entailment(&g(&b), &g(&a)).unwrap().is_none());
    }

    #[test]
    fn equivalence_basics() {
        let a = g("_:a <http://p> _:b .\n_:b <http://p> _:a .");
        let b = g("_:x <http://p> _:y .\n_:y <http://p> _:x .");
        assert!(test_equivalence(&a, &b));
        let c = g("_:x <http://p> _:x .\n_:y <http://p> _:y .");
        assert!(!test_equivalence(&a, &c));
        assert!(test_equivalence(&Graph::new("e"), &Graph::new("f")));
    }

    #[test]
    fn symmetric_structures_need_backtracking() {
        // two disjoint 3-cycles vs one 6-cycle: colour refinement cannot
        // tell them apart
        let mut two = String::new();
        let mut six = String::new();
        for i in 0..3 {
            two.push_str(&format!("_:a{i} <http://p> _:a{} .\n", (i + 1) % 3));
            two.push_str(&format!("_:c{i} <http://p> _:c{} .\n", (i + 1) % 3));
        }
        for i in 0..6 {
            six.push_str(&format!("_:s{i} <http://p> _:s{} .\n", (i + 1) % 6));
        }
        assert!(isomorphism_search(&g(&two), &g(&six)).is_none());
        assert!(!test_equivalence(&g(&two), &g(&six)));
        let relabeled = two.replace("_:a", "_:z");
        assert!(isomorphism_search(&g(&two), &g(&relabeled)).is_some());
    }
}
