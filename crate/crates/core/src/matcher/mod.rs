//! Blank node matching: find an injection between the blank nodes of two
//! graphs minimising the summed mapped edit distance of their incident
//! triples, optionally comparing IRIs and literals up to an
//! [`EquivalenceRelation`].
//!
//! `solve_bm` picks one of three strategies:
//!
//! 1. small instances: exact branch and bound over injections;
//! 2. no triple joins two blank nodes: exact minimum-cost assignment;
//! 3. otherwise: signature seeding plus hill-climbing, an upper bound.
//!
//! Cost accounting: every mapped pair contributes its distance; every
//! blank node left out of the mapping, on either side, contributes the
//! number of triples it occurs in. A triple joining two mapped blank nodes
//! is counted at both endpoints.

mod assignment;
mod context;
mod search;
mod signature;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub(crate) use context::MatchContext;
pub use signature::{build_signatures, Signature};
pub(crate) use signature::joint_signatures;

use crate::equiv::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::rdf::{Graph, Renaming, Term};

/// Upper bound on the leaves the exact tier may enumerate.
const EXACT_LEAF_LIMIT: u128 = 2_000_000;

/// Size guard of [`brute_force_bm`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    BruteForce,
    Assignment,
    Refinement,
    /// Supplied from outside (a file, a planted truth), not searched.
    Given,
}

impl Method {
    pub fn is_exact(self) -> bool {
        matches!(self, Method::BruteForce | Method::Assignment)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "brute_force",
            Method::Assignment => "assignment",
            Method::Refinement => "refinement",
            Method::Given => "given",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "brute_force" => Ok(Method::BruteForce),
            "assignment" => Ok(Method::Assignment),
            "refinement" => Ok(Method::Refinement),
            "given" => Ok(Method::Given),
            other => Err(format!("unknown method {other}")),
        }
    }
}

/// An injective partial map from blank nodes of one graph to blank nodes of
/// another, with the cost it achieves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnodeMapping {
    pairs: BTreeMap<Term, Term>,
    cost: usize,
    method: Method,
    /// Set when the search ran with the graphs swapped.
    swapped: bool,
}

impl BnodeMapping {
    pub fn empty(method: Method) -> BnodeMapping {
        BnodeMapping {
            pairs: BTreeMap::new(),
            cost: 0,
            method,
            swapped: false,
        }
    }

    /// Builds a mapping from explicit pairs, checking that both sides are
    /// blank nodes and that no image is used twice.
    pub fn from_pairs<I>(pairs: I, cost: usize, method: Method) -> Result<BnodeMapping>
    where
        I: IntoIterator<Item = (Term, Term)>,
    {
        let mut out = BTreeMap::new();
        let mut images = BTreeSet::new();
        for (a, b) in pairs {
            for t in [&a, &b] {
                if !t.is_blank() {
                    return Err(Error::NotABlankNode(t.clone()));
                }
            }
            if !images.insert(b.clone()) {
                return Err(Error::NotInjective(b.to_string()));
            }
            if let Some(prev) = out.insert(a.clone(), b) {
                images.remove(&prev);
                return Err(Error::NotInjective(a.to_string()));
            }
        }
        Ok(BnodeMapping {
            pairs: out,
            cost,
            method,
            swapped: false,
        })
    }

    pub fn pairs(&self) -> &BTreeMap<Term, Term> {
        &self.pairs
    }

    pub fn get(&self, b: &Term) -> Option<&Term> {
        self.pairs.get(b)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn inverse(&self) -> BnodeMapping {
        BnodeMapping {
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            cost: self.cost,
            method: self.method,
            swapped: !self.swapped,
        }
    }

    pub fn to_renaming(&self) -> Renaming {
        Renaming::from_pairs(self.pairs.iter().map(|(a, b)| (a.clone(), b.clone())))
            .expect("blank nodes only")
    }

    /// `.bm` text: `M <label1> <label2>` lines sorted by pair, then a
    /// `# cost=<n> method=<tier>` trailer.
    pub fn to_bm_string(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.pairs {
            out.push_str(&format!("M {} {}\n", a.value(), b.value()));
        }
        out.push_str(&format!("# cost={} method={}\n", self.cost, self.method));
        out
    }

    pub fn parse_bm(text: &str) -> Result<BnodeMapping> {
        let mut pairs = Vec::new();
        let mut cost = 0;
        let mut method = Method::Given;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("cost=") {
                        cost = v.parse().map_err(|_| Error::syntax(lineno, "bad cost"))?;
                    } else if let Some(v) = field.strip_prefix("method=") {
                        method = v.parse().map_err(|e: String| Error::syntax(lineno, e))?;
                    }
                }
                continue;
            }
            pairs.push(parse_mapping_line(line, lineno)?);
        }
        BnodeMapping::from_pairs(pairs, cost, method)
    }
}

/// Parses `M <label1> <label2>`.
pub(crate) fn parse_mapping_line(line: &str, lineno: usize) -> Result<(Term, Term)> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("M"), Some(a), Some(b), None) => Ok((Term::blank(a), Term::blank(b))),
        _ => Err(Error::syntax(lineno, format!("expected 'M <label> <label>', got '{line}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatcherConfig {
    pub exact_threshold: usize,
    pub max_refinement_rounds: usize,
    pub seed: u64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            exact_threshold: 7,
            max_refinement_rounds: 20,
            seed: 0,
        }
    }
}

/// Mapped edit distance between `b1` in `g1` and `b2` in `g2`, with
/// neighbouring blank nodes compared through `mapping` and constants through
/// `rel`.
pub fn dist(
    g1: &Graph,
    g2: &Graph,
    b1: &Term,
    b2: &Term,
    mapping: &BnodeMapping,
    rel: &EquivalenceRelation,
) -> Result<usize> {
    for b in [b1, b2] {
        if !b.is_blank() {
            return Err(Error::NotABlankNode(b.clone()));
        }
    }
    let ctx = MatchContext::new(g1, g2, rel);
    let (Some(&i), Some(&k)) = (ctx.left.index.get(b1), ctx.right.index.get(b2)) else {
        let missing = if ctx.left.index.contains_key(b1) { b2 } else { b1 };
        return Err(Error::ForeignBlankNode(missing.to_string()));
    };
    let map = index_map(&ctx, mapping);
    Ok(ctx.dist(i, k, &map))
}

/// Objective value of `mapping`; pairs naming unknown blank nodes are ignored.
pub fn mapping_cost(g1: &Graph, g2: &Graph, mapping: &BnodeMapping, rel: &EquivalenceRelation) -> usize {
    let ctx = MatchContext::new(g1, g2, rel);
    ctx.cost(&index_map(&ctx, mapping))
}

fn index_map(ctx: &MatchContext, mapping: &BnodeMapping) -> Vec<Option<usize>> {
    let mut map = vec![None; ctx.left.len()];
    for (a, b) in mapping.pairs() {
        if let (Some(&i), Some(&k)) = (ctx.left.index.get(a), ctx.right.index.get(b)) {
            map[i] = Some(k);
        }
    }
    map
}

fn finish(ctx: &MatchContext, map: &[Option<usize>], cost: usize, method: Method) -> BnodeMapping {
    BnodeMapping {
        pairs: ctx.to_pairs(map),
        cost,
        method,
        swapped: false,
    }
}

fn injection_count(n1: usize, n2: usize) -> u128 {
    let (n1, n2) = (n1.min(n2), n1.max(n2));
    (0..n1).fold(1u128, |acc, i| acc.saturating_mul((n2 - i) as u128))
}

/// Whether the branch-and-bound search is allowed on these sizes.
pub fn exact_feasible(n1: usize, n2: usize) -> bool {
    injection_count(n1, n2) <= EXACT_LEAF_LIMIT
}

/// Solves the matching problem with the strategy chosen by instance shape.
pub fn solve_bm(g1: &Graph, g2: &Graph, rel: &EquivalenceRelation, cfg: &MatcherConfig) -> BnodeMapping {
    let (n1, n2) = (g1.bnodes().len(), g2.bnodes().len());
    if n1 > n2 {
        return solve_bm(g2, g1, rel, cfg).inverse();
    }
    let ctx = MatchContext::new(g1, g2, rel);
    let method = if n1 == 0 {
        Method::Assignment
    } else if n1 <= cfg.exact_threshold && injection_count(n1, n2) <= EXACT_LEAF_LIMIT {
        Method::BruteForce
    } else if !ctx.is_connected() {
        Method::Assignment
    } else {
        Method::Refinement
    };
    solve_in_context(g1, g2, rel, cfg, &ctx, method)
}

/// Runs one specific strategy (used for benchmarking the tiers against
/// each other). `Method::BruteForce` means the branch-and-bound search.
pub fn solve_with(
    g1: &Graph,
    g2: &Graph,
    rel: &EquivalenceRelation,
    cfg: &MatcherConfig,
    method: Method,
) -> BnodeMapping {
    if g1.bnodes().len() > g2.bnodes().len() {
        return solve_with(g2, g1, rel, cfg, method).inverse();
    }
    let ctx = MatchContext::new(g1, g2, rel);
    solve_in_context(g1, g2, rel, cfg, &ctx, method)
}

fn solve_in_context(
    g1: &Graph,
    g2: &Graph,
    rel: &EquivalenceRelation,
    cfg: &MatcherConfig,
    ctx: &MatchContext,
    method: Method,
) -> BnodeMapping {
    if ctx.left.len() == 0 {
        let cost = ctx.empty_cost();
        return BnodeMapping {
            cost,
            ..BnodeMapping::empty(method)
        };
    }
    let (map, cost) = match method {
        Method::BruteForce | Method::Given => search::branch_and_bound(ctx),
        Method::Assignment => search::assignment(ctx),
        Method::Refinement => {
            let rounds = ctx.left.len() + ctx.right.len() + 1;
            let (ls, rs) = joint_signatures(g1, g2, rel, rounds);
            search::refinement(ctx, &ls, &rs, cfg.max_refinement_rounds, cfg.seed)
        }
    };
    finish(ctx, &map, cost, method)
}

/// Exhaustive enumeration of every partial injection; the reference
/// answer for small instances. Both graphs must have at most
/// [`BRUTE_FORCE_LIMIT`] blank nodes.
pub fn brute_force_bm(g1: &Graph, g2: &Graph, rel: &EquivalenceRelation) -> Result<BnodeMapping> {
    let ctx = MatchContext::new(g1, g2, rel);
    let (map, cost) = search::exhaustive(&ctx, BRUTE_FORCE_LIMIT)?;
    Ok(finish(&ctx, &map, cost, Method::BruteForce))
}
