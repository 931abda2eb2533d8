//! Per-blank-node signatures refined by neighbour colours.
//!
//! Round 1 renders every incident triple as a token with the owning blank
//! node as `@self`, every other blank node as `@bnode`, and each IRI or
//! literal as its equivalence-group representative. Round k+1 replaces
//! `@bnode` by the round-k colour of that neighbour. A colour is a digest of
//! the previous colour and the sorted tokens, so each round refines the
//! previous partition.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::equiv::EquivalenceRelation;
use crate::rdf::{Graph, Term};

#[derive(Debug, Clone, Eq)]
pub struct Signature {
    pub bnode: Term,
    /// Sorted, one per incident triple.
    pub tokens: Vec<String>,
    pub color: String,
    pub round: usize,
}

/// Signatures compare by content; the owning blank node is ignored.
impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.color == other.color
    }
}

#[derive(Debug, Clone)]
enum Part {
    Own,
    Other(Term),
    Fixed(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Refiner {
    templates: BTreeMap<Term, Vec<(Part, String, Part)>>,
    current: BTreeMap<Term, Signature>,
    round: usize,
}

impl Refiner {
    /// `rel` should already know the terms of every graph that will be
    /// compared, otherwise representatives may differ between graphs.
    pub fn new(graph: &Graph, rel: &EquivalenceRelation) -> Refiner {
        let mut templates: BTreeMap<Term, Vec<(Part, String, Part)>> = BTreeMap::new();
        for b in graph.bnodes() {
            templates.insert(b, Vec::new());
        }
        for t in graph {
            let pred = rel.representative(t.predicate()).to_string();
            for (pos, owner) in [t.subject(), t.object()].into_iter().enumerate() {
                if !owner.is_blank() || (pos == 1 && t.subject() == t.object()) {
                    continue;
                }
                let part = |term: &Term| {
                    if term == owner {
                        Part::Own
                    } else if term.is_blank() {
                        Part::Other(term.clone())
                    } else {
                        Part::Fixed(rel.representative(term).to_string())
                    }
                };
                let row = (part(t.subject()), pred.clone(), part(t.object()));
                templates.get_mut(owner).expect("registered").push(row);
            }
        }
        Refiner {
            templates,
            current: BTreeMap::new(),
            round: 0,
        }
    }

    pub fn step(&mut self) {
        let prev = &self.current;
        let render = |part: &Part| -> String {
            match part {
                Part::Own => "@self".to_string(),
                Part::Fixed(s) => s.clone(),
                Part::Other(b) => match prev.get(b) {
                    Some(sig) => format!("@c{}", sig.color),
                    None => "@bnode".to_string(),
                },
            }
        };
        let mut next = BTreeMap::new();
        for (b, rows) in &self.templates {
            let mut tokens: Vec<String> = rows
                .iter()
                .map(|(s, p, o)| format!("{} {} {}", render(s), p, render(o)))
                .collect();
            tokens.sort();
            let mut h = Sha256::new();
            if let Some(old) = prev.get(b) {
                h.update(old.color.as_bytes());
            }
            for t in &tokens {
                h.update(b"\n");
                h.update(t.as_bytes());
            }
            let digest = h.finalize();
            let color = digest[..8].iter().map(|x| format!("{x:02x}")).collect();
            next.insert(
                b.clone(),
                Signature {
                    bnode: b.clone(),
                    tokens,
                    color,
                    round: self.round + 1,
                },
            );
        }
        self.current = next;
        self.round += 1;
    }
}

/// Runs exactly `rounds` refinement rounds (at least one).
pub fn build_signatures(
    graph: &Graph,
    rel: &EquivalenceRelation,
    rounds: usize,
) -> BTreeMap<Term, Signature> {
    let rel = rel.clone().with_graphs(&[graph]);
    let mut refiner = Refiner::new(graph, &rel);
    for _ in 0..rounds.max(1) {
        refiner.step();
    }
    refiner.current
}

/// Refines both graphs in lockstep until the joint partition stops
/// splitting (or `max_rounds` is hit), so colours are comparable across
/// the two graphs.
pub(crate) fn joint_signatures(
    g1: &Graph,
    g2: &Graph,
    rel: &EquivalenceRelation,
    max_rounds: usize,
) -> (BTreeMap<Term, Signature>, BTreeMap<Term, Signature>) {
    let rel = rel.clone().with_graphs(&[g1, g2]);
    let mut left = Refiner::new(g1, &rel);
    let mut right = Refiner::new(g2, &rel);
    let mut classes = 0;
    for _ in 0..max_rounds.max(1) {
        left.step();
        right.step();
        let joint: BTreeSet<&String> = left
            .current
            .values()
            .chain(right.current.values())
            .map(|s| &s.color)
            .collect();
        if joint.len() == classes {
            break;
        }
        classes = joint.len();
    }
    (left.current, right.current)
}
