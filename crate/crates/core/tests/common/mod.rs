#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use bnmatch::ntriples::parse_ntriples;
use bnmatch::{Graph, Renaming, Term};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Graph {
    let f = std::fs::File::open(fixture_path(name)).expect("fixture exists");
    let mut g = parse_ntriples(std::io::BufReader::new(f)).expect("fixture parses").graph;
    g.set_id(name);
    g
}

pub const MUS: &str = "http://www.example.com/music/v0/";

pub fn mus(local: &str) -> Term {
    Term::iri(format!("{MUS}{local}"))
}

/// Relabels every blank node to `<prefix><k>` in a random order.
pub fn random_relabel(g: &Graph, prefix: &str, seed: u64) -> (Graph, BTreeMap<String, String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Term> = g.bnodes().into_iter().collect();
    let mut targets: Vec<usize> = (0..labels.len()).collect();
    targets.shuffle(&mut rng);
    let pairs: Vec<(Term, Term)> = labels
        .iter()
        .zip(&targets)
        .map(|(b, k)| (b.clone(), Term::blank(format!("{prefix}{k}"))))
        .collect();
    let map = pairs
        .iter()
        .map(|(a, b)| (a.value().to_string(), b.value().to_string()))
        .collect();
    (g.rename(&Renaming::from_pairs(pairs).unwrap()), map)
}

/// Blank node labels of a graph, read off the rendered triples.
fn labels(g: &Graph) -> Vec<String> {
    g.bnodes().into_iter().map(|b| b.value().to_string()).collect()
}

fn row(s: &Term, p: &Term, o: &Term, name: &dyn Fn(&Term) -> String) -> String {
    format!("{} {} {}", name(s), p, name(o))
}

/// Incident triples of `label`, with blank nodes renamed by `name`.
fn incident(g: &Graph, label: &str, name: &dyn Fn(&Term) -> String) -> BTreeSet<String> {
    g.iter()
        .filter(|t| (t.subject().is_blank() && t.subject().value() == label) || (t.object().is_blank() && t.object().value() == label))
        .map(|t| row(t.subject(), t.predicate(), t.object(), name))
        .collect()
}

/// Objective value of a mapping under exact term comparison, computed on
/// rendered strings: mapped pairs add the size of the symmetric difference
/// of their incident triples, unmapped blank nodes on either side add
/// their triple count.
pub fn oracle_cost(g1: &Graph, g2: &Graph, pairs: &BTreeMap<String, String>) -> usize {
    let left_name = |t: &Term| match t {
        Term::Blank(l) => match pairs.get(l) {
            Some(img) => format!("R:{img}"),
            None => format!("L:{l}"),
        },
        other => other.to_string(),
    };
    let right_name = |t: &Term| match t {
        Term::Blank(l) => format!("R:{l}"),
        other => other.to_string(),
    };
    let mut cost = 0;
    let images: BTreeSet<&String> = pairs.values().collect();
    for l in labels(g1) {
        let own = incident(g1, &l, &left_name);
        match pairs.get(&l) {
            Some(r) => {
                let other = incident(g2, r, &right_name);
                cost += own.symmetric_difference(&other).count();
            }
            None => cost += own.len(),
        }
    }
    for r in labels(g2) {
        if !images.contains(&r) {
            cost += incident(g2, &r, &right_name).len();
        }
    }
    cost
}

/// Every partial injection from the blank nodes of `g1` into those of `g2`.
pub fn all_injections(g1: &Graph, g2: &Graph) -> Vec<BTreeMap<String, String>> {
    let (l, r) = (labels(g1), labels(g2));
    let mut out = Vec::new();
    fn go(l: &[String], r: &[String], used: &mut Vec<bool>, cur: &mut BTreeMap<String, String>, out: &mut Vec<BTreeMap<String, String>>) {
        let Some((head, rest)) = l.split_first() else {
            out.push(cur.clone());
            return;
        };
        go(rest, r, used, cur, out);
        for k in 0..r.len() {
            if !used[k] {
                used[k] = true;
                cur.insert(head.clone(), r[k].clone());
                go(rest, r, used, cur, out);
                cur.remove(head);
                used[k] = false;
            }
        }
    }
    go(&l, &r, &mut vec![false; r.len()], &mut BTreeMap::new(), &mut out);
    out
}

pub fn oracle_min_cost(g1: &Graph, g2: &Graph) -> usize {
    all_injections(g1, g2).iter().map(|m| oracle_cost(g1, g2, m)).min().unwrap()
}

/// Size of the mapped delta, on rendered strings: left blank nodes are
/// renamed by the mapping, unmapped ones on either side stay distinct.
pub fn oracle_delta_size(g1: &Graph, g2: &Graph, pairs: &BTreeMap<String, String>) -> usize {
    let left: BTreeSet<String> = g1
        .iter()
        .map(|t| {
            row(t.subject(), t.predicate(), t.object(), &|x: &Term| match x {
                Term::Blank(l) => pairs.get(l).map_or(format!("L:{l}"), |r| format!("R:{r}")),
                other => other.to_string(),
            })
        })
        .collect();
    let right: BTreeSet<String> = g2
        .iter()
        .map(|t| {
            row(t.subject(), t.predicate(), t.object(), &|x: &Term| match x {
                Term::Blank(l) => format!("R:{l}"),
                other => other.to_string(),
            })
        })
        .collect();
    left.symmetric_difference(&right).count()
}

pub fn oracle_min_delta(g1: &Graph, g2: &Graph) -> usize {
    all_injections(g1, g2).iter().map(|m| oracle_delta_size(g1, g2, m)).min().unwrap()
}

pub fn pairs_of(m: &bnmatch::BnodeMapping) -> BTreeMap<String, String> {
    m.pairs()
        .iter()
        .map(|(a, b)| (a.value().to_string(), b.value().to_string()))
        .collect()
}
