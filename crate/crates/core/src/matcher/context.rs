//! Interned view of two graphs used by every matching strategy.
//!
//! Each blank node keeps its incident triples with constants replaced by the
//! id of their equivalence-group representative, itself replaced by
//! [`Slot::Own`], and other blank nodes by their index on the same side.
//! Distances and costs are computed on this view only.

use std::collections::{BTreeMap, HashMap};

use crate::equiv::EquivalenceRelation;
use crate::rdf::{Graph, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Slot {
    Own,
    Bnode(u32),
    Const(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Inc {
    pub s: Slot,
    pub p: u32,
    pub o: Slot,
}

/// A node after renaming: a constant, an unmapped left blank node, or a
/// right blank node. Left and right blank nodes never compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Const(u32),
    Left(u32),
    Right(u32),
}

type Row = (Node, u32, Node);

#[derive(Debug, Clone, Default)]
pub(crate) struct Side {
    pub labels: Vec<Term>,
    pub index: HashMap<Term, usize>,
    pub incident: Vec<Vec<Inc>>,
    /// Other blank nodes sharing a triple, sorted and deduplicated.
    pub neighbors: Vec<Vec<usize>>,
    /// |triples_of(b)| in the original graph.
    pub raw_len: Vec<usize>,
    pub connected: bool,
}

impl Side {
    fn build(graph: &Graph, consts: &mut Interner, rel: &EquivalenceRelation) -> Side {
        let labels: Vec<Term> = graph.bnodes().into_iter().collect();
        let index: HashMap<Term, usize> =
            labels.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let n = labels.len();
        let mut incident = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        let mut raw_len = vec![0; n];
        let mut connected = false;
        for t in graph {
            let s = index.get(t.subject()).copied();
            let o = index.get(t.object()).copied();
            if s.is_none() && o.is_none() {
                continue;
            }
            let p = consts.id(rel.representative(t.predicate()));
            let slot = |term: &Term, own: usize, consts: &mut Interner| match index.get(term) {
                Some(&j) if j == own => Slot::Own,
                Some(&j) => Slot::Bnode(j as u32),
                None => Slot::Const(consts.id(rel.representative(term))),
            };
            let mut owners = vec![];
            if let Some(i) = s {
                owners.push(i);
            }
            if let Some(j) = o {
                if s != Some(j) {
                    owners.push(j);
                }
            }
            if let (Some(i), Some(j)) = (s, o) {
                if i != j {
                    connected = true;
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
            for own in owners {
                let inc = Inc {
                    s: slot(t.subject(), own, consts),
                    p,
                    o: slot(t.object(), own, consts),
                };
                incident[own].push(inc);
                raw_len[own] += 1;
            }
        }
        for (inc, nb) in incident.iter_mut().zip(neighbors.iter_mut()) {
            inc.sort();
            inc.dedup();
            nb.sort();
            nb.dedup();
        }
        Side {
            labels,
            index,
            incident,
            neighbors,
            raw_len,
            connected,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Default)]
pub(crate) struct Interner {
    ids: HashMap<Term, u32>,
}

impl Interner {
    fn id(&mut self, term: Term) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(term).or_insert(next)
    }
}

#[derive(Debug)]
pub(crate) struct MatchContext {
    pub left: Side,
    pub right: Side,
    right_rows: Vec<Vec<Row>>,
}

impl MatchContext {
    pub fn new(g1: &Graph, g2: &Graph, rel: &EquivalenceRelation) -> MatchContext {
        let rel = rel.clone().with_graphs(&[g1, g2]);
        let mut consts = Interner::default();
        let left = Side::build(g1, &mut consts, &rel);
        let right = Side::build(g2, &mut consts, &rel);
        let right_rows = (0..right.len())
            .map(|k| {
                let mut rows: Vec<Row> = right.incident[k]
                    .iter()
                    .map(|inc| {
                        let node = |slot: Slot| match slot {
                            Slot::Own => Node::Right(k as u32),
                            Slot::Bnode(l) => Node::Right(l),
                            Slot::Const(c) => Node::Const(c),
                        };
                        (node(inc.s), inc.p, node(inc.o))
                    })
                    .collect();
                rows.sort();
                rows.dedup();
                rows
            })
            .collect();
        MatchContext {
            left,
            right,
            right_rows,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.left.connected || self.right.connected
    }

    /// `dist_m(b1, b2)`: size of the symmetric difference between the
    /// incident triples of `i` (renamed by `map`, with `i` itself sent to
    /// `k`) and those of `k`.
    pub fn dist(&self, i: usize, k: usize, map: &[Option<usize>]) -> usize {
        let mut buf = Vec::with_capacity(self.left.incident[i].len());
        self.dist_with(i, k, map, &mut buf)
    }

    fn dist_with(&self, i: usize, k: usize, map: &[Option<usize>], buf: &mut Vec<Row>) -> usize {
        buf.clear();
        let node = |slot: Slot| match slot {
            Slot::Own => Node::Right(k as u32),
            Slot::Bnode(j) => match map[j as usize] {
                Some(img) => Node::Right(img as u32),
                None => Node::Left(j),
            },
            Slot::Const(c) => Node::Const(c),
        };
        buf.extend(self.left.incident[i].iter().map(|inc| (node(inc.s), inc.p, node(inc.o))));
        buf.sort_unstable();
        buf.dedup();
        symmetric_difference_len(buf, &self.right_rows[k])
    }

    /// Objective of a (partial) injection given as left index -> right index.
    /// Unmapped blank nodes on either side contribute their raw triple count.
    pub fn cost(&self, map: &[Option<usize>]) -> usize {
        let mut buf = Vec::new();
        let mut used = vec![false; self.right.len()];
        let mut total = 0;
        for (i, m) in map.iter().enumerate() {
            match *m {
                Some(k) => {
                    used[k] = true;
                    total += self.dist_with(i, k, map, &mut buf);
                }
                None => total += self.left.raw_len[i],
            }
        }
        total
            + used
                .iter()
                .zip(&self.right.raw_len)
                .filter(|(u, _)| !**u)
                .map(|(_, n)| n)
                .sum::<usize>()
    }

    pub fn empty_cost(&self) -> usize {
        self.left.raw_len.iter().sum::<usize>() + self.right.raw_len.iter().sum::<usize>()
    }

    pub fn to_pairs(&self, map: &[Option<usize>]) -> BTreeMap<Term, Term> {
        map.iter()
            .enumerate()
            .filter_map(|(i, m)| {
                m.map(|k| (self.left.labels[i].clone(), self.right.labels[k].clone()))
            })
            .collect()
    }
}

fn symmetric_difference_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut diff) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                diff += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                diff += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    diff + (a.len() - i) + (b.len() - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_difference() {
        assert_eq!(symmetric_difference_len(&[1, 2, 3], &[2, 3, 4, 5]), 3);
        assert_eq!(symmetric_difference_len::<u8>(&[], &[]), 0);
    }
}
