//! Equivalence relations over IRIs (and literals) used when comparing
//! resources that come from different sources.
//!
//! Three policies are supported: exact string equality, canonical-suffix
//! equality, and the closure of an externally supplied set of `owl:sameAs`
//! pairs. Every group has a single representative, the member with the
//! shortest N-Triples rendering (ties broken lexicographically).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::rdf::{Graph, Term, OWL_SAME_AS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Exact,
    Suffix,
    SameAs,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Exact => "exact",
            Policy::Suffix => "suffix",
            Policy::SameAs => "sameas",
        })
    }
}

/// Substring after the last `/` or `#`, lowercased, underscores removed.
pub fn canonical_suffix(iri: &str) -> String {
    let tail = match iri.rfind(['/', '#']) {
        Some(i) => &iri[i + 1..],
        None => iri,
    };
    tail.chars().filter(|&c| c != '_').flat_map(char::to_lowercase).collect()
}

#[derive(Debug, Clone)]
pub struct EquivalenceRelation {
    policy: Policy,
    sameas_pairs: BTreeSet<(Term, Term)>,
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    parent: Vec<usize>,
    suffix_heads: HashMap<String, usize>,
    // representative per union-find root, rebuilt after every registration batch
    representatives: HashMap<usize, Term>,
}

impl EquivalenceRelation {
    fn with_policy(policy: Policy) -> Self {
        EquivalenceRelation {
            policy,
            sameas_pairs: BTreeSet::new(),
            terms: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            suffix_heads: HashMap::new(),
            representatives: HashMap::new(),
        }
    }

    pub fn exact() -> Self {
        Self::with_policy(Policy::Exact)
    }

    pub fn suffix() -> Self {
        Self::with_policy(Policy::Suffix)
    }

    /// Closure of the given pairs. Blank nodes are rejected.
    pub fn same_as<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Term, Term)>,
    {
        let mut rel = Self::with_policy(Policy::SameAs);
        for (a, b) in pairs {
            for t in [&a, &b] {
                if t.is_blank() {
                    return Err(Error::BlankInEquivalence(t.clone()));
                }
            }
            let (ia, ib) = (rel.register(&a), rel.register(&b));
            rel.union(ia, ib);
            rel.sameas_pairs.insert((a, b));
        }
        rel.rebuild_representatives();
        Ok(rel)
    }

    /// Reads pairs from a graph whose triples all use `owl:sameAs`.
    pub fn same_as_from_graph(graph: &Graph) -> Result<Self> {
        let mut pairs = Vec::with_capacity(graph.len());
        for t in graph {
            if t.predicate() != &Term::iri(OWL_SAME_AS) {
                return Err(Error::InvalidTriple {
                    position: "sameAs file predicate",
                    term: t.predicate().to_string(),
                });
            }
            pairs.push((t.subject().clone(), t.object().clone()));
        }
        Self::same_as(pairs)
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn sameas_pairs(&self) -> &BTreeSet<(Term, Term)> {
        &self.sameas_pairs
    }

    /// Adds terms to the universe the groups are drawn from. Suffix groups
    /// and representatives only cover registered terms.
    pub fn with_terms<'a, I>(mut self, terms: I) -> Self
    where
        I: IntoIterator<Item = &'a Term>,
    {
        for t in terms {
            if !t.is_blank() {
                self.register(t);
            }
        }
        self.rebuild_representatives();
        self
    }

    /// Registers every IRI and literal of the graphs.
    pub fn with_graphs(self, graphs: &[&Graph]) -> Self {
        let terms: Vec<&Term> = graphs
            .iter()
            .flat_map(|g| g.iter().flat_map(|t| t.terms()))
            .collect();
        self.with_terms(terms)
    }

    fn register(&mut self, term: &Term) -> usize {
        if let Some(&i) = self.index.get(term) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(term.clone());
        self.parent.push(i);
        self.index.insert(term.clone(), i);
        if self.policy == Policy::Suffix {
            if let Term::Iri(v) = term {
                match self.suffix_heads.get(&canonical_suffix(v)) {
                    Some(&head) => self.union(head, i),
                    None => {
                        self.suffix_heads.insert(canonical_suffix(v), i);
                    }
                }
            }
        }
        i
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn rebuild_representatives(&mut self) {
        // flatten so later finds are one hop
        for i in 0..self.parent.len() {
            self.parent[i] = self.find(i);
        }
        let mut reps: HashMap<usize, Term> = HashMap::new();
        for (i, term) in self.terms.iter().enumerate() {
            let root = self.parent[i];
            match reps.get(&root) {
                Some(cur) if !shorter(term, cur) => {}
                _ => {
                    reps.insert(root, term.clone());
                }
            }
        }
        self.representatives = reps;
    }

    fn check_term(term: &Term) -> Result<()> {
        if term.is_blank() {
            Err(Error::BlankInEquivalence(term.clone()))
        } else {
            Ok(())
        }
    }

    pub fn are_equivalent(&self, a: &Term, b: &Term) -> Result<bool> {
        Self::check_term(a)?;
        Self::check_term(b)?;
        if a == b {
            return Ok(true);
        }
        Ok(match self.policy {
            Policy::Exact => false,
            Policy::Suffix => match (a, b) {
                (Term::Iri(x), Term::Iri(y)) => canonical_suffix(x) == canonical_suffix(y),
                _ => false,
            },
            Policy::SameAs => match (self.index.get(a), self.index.get(b)) {
                (Some(&i), Some(&j)) => self.find(i) == self.find(j),
                _ => false,
            },
        })
    }

    /// The group's representative. Blank nodes map to themselves.
    pub fn representative(&self, term: &Term) -> Term {
        if term.is_blank() || self.policy == Policy::Exact {
            return term.clone();
        }
        if let Some(&i) = self.index.get(term) {
            return self.representatives[&self.find(i)].clone();
        }
        // Unregistered IRI under the suffix policy: compare with its would-be group.
        if let (Policy::Suffix, Term::Iri(v)) = (self.policy, term) {
            if let Some(&head) = self.suffix_heads.get(&canonical_suffix(v)) {
                let rep = &self.representatives[&self.find(head)];
                if shorter(rep, term) {
                    return rep.clone();
                }
            }
        }
        term.clone()
    }

    /// Members of the group of `term` among registered terms, sorted.
    pub fn group(&self, term: &Term) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        out.insert(term.clone());
        if let Some(&i) = self.index.get(term) {
            let root = self.find(i);
            for (j, t) in self.terms.iter().enumerate() {
                if self.find(j) == root {
                    out.insert(t.clone());
                }
            }
        } else if let (Policy::Suffix, Term::Iri(v)) = (self.policy, term) {
            let key = canonical_suffix(v);
            out.extend(
                self.terms
                    .iter()
                    .filter(|t| matches!(t, Term::Iri(u) if canonical_suffix(u) == key))
                    .cloned(),
            );
        }
        out
    }
}

fn shorter(a: &Term, b: &Term) -> bool {
    let (ra, rb) = (a.to_string(), b.to_string());
    (ra.len(), &ra) < (rb.len(), &rb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn suffix_examples() {
        assert_eq!(canonical_suffix("http://www.dbpedia.org/John_Lennon"), "johnlennon");
        assert_eq!(
            canonical_suffix("http://www.example.com/music/v0/John_Lennon"),
            "johnlennon"
        );
        assert_eq!(canonical_suffix("abc"), "abc");
        assert_eq!(canonical_suffix("http://x/a#B_c"), "bc");
    }

    #[test]
    fn suffix_false_positive() {
        let r = EquivalenceRelation::suffix();
        let a = Term::iri("http://www.fishbase.org/entity#Argentina");
        let b = Term::iri("http://www.marinespecies.org/entity#WoRMS:125885/Argentina");
        assert!(r.are_equivalent(&a, &b).unwrap());
        assert!(!EquivalenceRelation::exact().are_equivalent(&a, &b).unwrap());
    }

    #[test]
    fn sameas_transitive() {
        let (a, b, c) = (Term::iri("http://a"), Term::iri("http://b"), Term::iri("http://c"));
        let r = EquivalenceRelation::same_as([(a.clone(), b.clone()), (b.clone(), c.clone())]).unwrap();
        assert!(r.are_equivalent(&a, &c).unwrap());
        assert!(!r.are_equivalent(&a, &Term::iri("http://d")).unwrap());
        assert!(r.are_equivalent(&Term::iri("http://d"), &Term::iri("http://d")).unwrap());
    }

    #[test]
    fn blank_nodes_rejected() {
        let r = EquivalenceRelation::exact();
        assert!(r.are_equivalent(&Term::blank("x"), &Term::iri("http://a")).is_err());
        assert!(EquivalenceRelation::same_as([(Term::blank("x"), Term::iri("http://a"))]).is_err());
    }

    #[test]
    fn literals_identity_unless_paired() {
        let (x, y) = (Term::literal("x"), Term::literal("y"));
        for r in [EquivalenceRelation::exact(), EquivalenceRelation::suffix()] {
            assert!(r.are_equivalent(&x, &x).unwrap());
            assert!(!r.are_equivalent(&x, &y).unwrap());
        }
        let r = EquivalenceRelation::same_as([(x.clone(), y.clone())]).unwrap();
        assert!(r.are_equivalent(&x, &y).unwrap());
    }

    #[test]
    fn representative_rules() {
        let long = Term::iri("http://long.example/x");
        let short = Term::iri("http://a/x");
        let r = EquivalenceRelation::same_as([(long.clone(), short.clone())]).unwrap();
        assert_eq!(r.representative(&long), short);
        assert_eq!(r.representative(&short), short);
        let lone = Term::iri("http://lonely");
        assert_eq!(r.representative(&lone), lone);

        // equal length: lexicographically smaller wins (oracle: sort)
        let (p, q) = (Term::iri("http://q/z"), Term::iri("http://p/z"));
        let r = EquivalenceRelation::suffix().with_terms([&p, &q]);
        let mut both = vec![p.to_string(), q.to_string()];
        both.sort();
        assert_eq!(r.representative(&p).to_string(), both[0]);
        assert_eq!(r.representative(&q).to_string(), both[0]);
    }

    #[test]
    fn sameas_file_must_use_sameas() {
        let g = crate::ntriples::parse_str("<http://a> <http://p> <http://b> .").unwrap().graph;
        assert!(EquivalenceRelation::same_as_from_graph(&g).is_err());
        let g = crate::ntriples::parse_str(&format!("<http://a> <{OWL_SAME_AS}> <http://b> ."))
            .unwrap()
            .graph;
        let r = EquivalenceRelation::same_as_from_graph(&g).unwrap();
        assert!(r.are_equivalent(&Term::iri("http://a"), &Term::iri("http://b")).unwrap());
    }

    fn iri_strategy() -> impl Strategy<Value = Term> {
        (
            prop::sample::select(vec!["http://a.org/", "http://b.net/x/", "urn:c#", "http://d/"]),
            prop::sample::select(vec!["Foo", "foo", "F_oo", "bar", "Bar_", "baz"]),
        )
            .prop_map(|(ns, local)| Term::iri(format!("{ns}{local}")))
    }

    fn relation_strategy() -> impl Strategy<Value = (EquivalenceRelation, Vec<Term>)> {
        let terms = prop::collection::vec(iri_strategy(), 3..8);
        (terms, prop::collection::vec((0usize..8, 0usize..8), 0..6), 0u8..3).prop_map(
            |(terms, pairs, policy)| {
                let rel = match policy {
                    0 => EquivalenceRelation::exact(),
                    1 => EquivalenceRelation::suffix(),
                    _ => EquivalenceRelation::same_as(
                        pairs
                            .iter()
                            .map(|&(i, j)| (terms[i % terms.len()].clone(), terms[j % terms.len()].clone())),
                    )
                    .unwrap(),
                };
                (rel.with_terms(terms.iter()), terms)
            },
        )
    }

    proptest! {
        #[test]
        fn equivalence_relation_laws((rel, terms) in relation_strategy()) {
            for a in &terms {
                prop_assert!(rel.are_equivalent(a, a).unwrap());
                for b in &terms {
                    let ab = rel.are_equivalent(a, b).unwrap();
                    prop_assert_eq!(ab, rel.are_equivalent(b, a).unwrap());
                    for c in &terms {
                        if ab && rel.are_equivalent(b, c).unwrap() {
                            prop_assert!(rel.are_equivalent(a, c).unwrap());
                        }
                    }
                    // representatives are group-constant
                    prop_assert_eq!(ab, rel.representative(a) == rel.representative(b));
                }
                let rep = rel.representative(a);
                prop_assert_eq!(rel.representative(&rep), rep.clone());
                prop_assert!(rel.group(a).contains(&rep));
            }
        }

        #[test]
        fn exact_implies_suffix(a in iri_strategy(), b in iri_strategy()) {
            let exact = EquivalenceRelation::exact().are_equivalent(&a, &b).unwrap();
            let suffix = EquivalenceRelation::suffix().are_equivalent(&a, &b).unwrap();
            prop_assert!(!exact || suffix);
        }
    }
}
