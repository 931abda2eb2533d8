//! Merging sources whose blank nodes may describe the same things.
//!
//! Each source's blank nodes are first moved into their own scope by
//! prefixing labels with a source tag (`g1_`, `g2_`, …). Sources are folded
//! left: source k is matched against the union of sources 1..k-1. A matched
//! pair is recommended when its distance is below half the triples the two
//! blank nodes take part in; accepted pairs become `owl:sameAs` triples, or,
//! with `unify`, share one label. IRIs that the equivalence relation joins
//! across sources are linked with `owl:sameAs` as well.

use std::collections::{BTreeMap, BTreeSet};

use crate::equiv::EquivalenceRelation;
use crate::matcher::{dist, solve_bm, MatcherConfig};
use crate::rdf::{Graph, Renaming, Term, Triple, OWL_SAME_AS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationOptions {
    /// Give linked blank nodes one label instead of emitting sameAs triples.
    pub unify: bool,
}

/// A pair proposed by the matcher, in prefixed labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub left: Term,
    pub right: Term,
    pub dist: usize,
    /// Triples each blank node occurs in.
    pub left_triples: usize,
    pub right_triples: usize,
    pub recommended: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceReport {
    pub tag: String,
    pub bnodes: usize,
    pub matched: usize,
}

#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub merged: Graph,
    pub bnode_links: BTreeSet<(Term, Term)>,
    pub uri_links: BTreeSet<(Term, Term)>,
    pub candidates: Vec<Candidate>,
    pub report: Vec<SourceReport>,
}

pub fn source_tag(index: usize) -> String {
    format!("g{}", index + 1)
}

/// Renames every blank node `_:x` to `_:<tag>_x`.
pub fn prefix_bnodes(graph: &Graph, tag: &str) -> Graph {
    let renaming = Renaming::from_pairs(
        graph
            .bnodes()
            .into_iter()
            .map(|b| {
                let label = format!("{tag}_{}", b.value());
                (b, Term::blank(label))
            }),
    )
    .expect("blank nodes only");
    let mut out = graph.rename(&renaming);
    out.set_id(tag);
    out
}

/// Integrates with automatic acceptance of recommended pairs.
pub fn integrate(
    sources: &[Graph],
    rel: &EquivalenceRelation,
    cfg: &MatcherConfig,
    opts: &IntegrationOptions,
) -> IntegrationResult {
    integrate_reviewed(sources, rel, cfg, opts, &mut |c: &Candidate| c.recommended)
}

/// Like [`integrate`], but every matched pair is put to `review`, which
/// decides whether it becomes a link.
pub fn integrate_reviewed(
    sources: &[Graph],
    rel: &EquivalenceRelation,
    cfg: &MatcherConfig,
    opts: &IntegrationOptions,
    review: &mut dyn FnMut(&Candidate) -> bool,
) -> IntegrationResult {
    let prefixed: Vec<Graph> = sources
        .iter()
        .enumerate()
        .map(|(i, g)| prefix_bnodes(g, &source_tag(i)))
        .collect();
    let refs: Vec<&Graph> = prefixed.iter().collect();
    let rel = rel.clone().with_graphs(&refs);

    let mut acc = Graph::new("merged");
    let mut bnode_links = BTreeSet::new();
    let mut candidates = Vec::new();
    let mut matched: BTreeMap<Term, usize> = BTreeMap::new();
    for (k, g) in prefixed.iter().enumerate() {
        if k > 0 && !acc.bnodes().is_empty() && !g.bnodes().is_empty() {
            let m = solve_bm(&acc, g, &rel, cfg);
            for (a, b) in m.pairs() {
                let d = dist(&acc, g, a, b, &m, &rel).expect("pairs come from the matcher");
                let lt = acc.triples_of(a).map_or(0, |t| t.len());
                let rt = g.triples_of(b).map_or(0, |t| t.len());
                let c = Candidate {
                    left: a.clone(),
                    right: b.clone(),
                    dist: d,
                    left_triples: lt,
                    right_triples: rt,
                    recommended: 2 * d < lt + rt,
                };
                if review(&c) {
                    bnode_links.insert((a.clone(), b.clone()));
                    for t in [a, b] {
                        *matched.entry(t.clone()).or_default() += 1;
                    }
                }
                candidates.push(c);
            }
        }
        acc.extend(g.iter().cloned());
    }

    let uri_links = uri_links(&prefixed, &rel);
    let mut merged = acc;
    if opts.unify {
        merged = merged.rename(&unifying_renaming(&bnode_links));
    } else {
        for (a, b) in &bnode_links {
            merged.insert(same_as(a, b));
        }
    }
    for (a, b) in &uri_links {
        merged.insert(same_as(a, b));
    }
    merged.set_id("merged");

    let report = prefixed
        .iter()
        .map(|g| {
            let bnodes = g.bnodes();
            SourceReport {
                tag: g.id().to_string(),
                matched: bnodes.iter().filter(|b| matched.contains_key(*b)).count(),
                bnodes: bnodes.len(),
            }
        })
        .collect();
    IntegrationResult {
        merged,
        bnode_links,
        uri_links,
        candidates,
        report,
    }
}

fn same_as(a: &Term, b: &Term) -> Triple {
    Triple::new(a.clone(), Term::iri(OWL_SAME_AS), b.clone()).expect("subject is an IRI or blank node")
}

/// Distinct IRIs of different sources that the relation declares equivalent.
fn uri_links(sources: &[Graph], rel: &EquivalenceRelation) -> BTreeSet<(Term, Term)> {
    let mut groups: BTreeMap<Term, BTreeMap<Term, BTreeSet<usize>>> = BTreeMap::new();
    for (i, g) in sources.iter().enumerate() {
        for iri in g.iris() {
            groups
                .entry(rel.representative(&iri))
                .or_default()
                .entry(iri)
                .or_default()
                .insert(i);
        }
    }
    let mut out = BTreeSet::new();
    for members in groups.values() {
        let list: Vec<(&Term, &BTreeSet<usize>)> = members.iter().collect();
        for (x, (a, sa)) in list.iter().enumerate() {
            for (b, sb) in &list[x + 1..] {
                let cross = sa.iter().any(|i| sb.iter().any(|j| i != j));
                if cross && rel.are_equivalent(a, b).unwrap_or(false) {
                    out.insert(((*a).clone(), (*b).clone()));
                }
            }
        }
    }
    out
}

/// Each linked cluster collapses to its smallest label.
fn unifying_renaming(links: &BTreeSet<(Term, Term)>) -> Renaming {
    let mut parent: BTreeMap<Term, Term> = BTreeMap::new();
    fn root(parent: &BTreeMap<Term, Term>, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Some(p) = parent.get(&cur) {
            cur = p.clone();
        }
        cur
    }
    for (a, b) in links {
        let (ra, rb) = (root(&parent, a), root(&parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent.insert(hi, lo);
        }
    }
    let mut renaming = Renaming::new();
    let members: BTreeSet<&Term> = links.iter().flat_map(|(a, b)| [a, b]).collect();
    for t in members {
        let r = root(&parent, t);
        if &r != t {
            renaming.insert(t.clone(), r).expect("blank nodes only");
        }
    }
    renaming
}
