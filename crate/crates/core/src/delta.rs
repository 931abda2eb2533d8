//! Explicit deltas between graphs, with and without a blank node mapping,
//! and patch application.
//!
//! With a mapping `M: B1 -> B2` a delta can be expressed in either label
//! scope:
//!
//! * [`Direction::ForwardIntoTargetLabels`]: compare `G1 # M` with `G2`. The
//!   operations use the target's labels; applying the script renames the
//!   base graph by the embedded mapping first.
//! * [`Direction::ForwardIntoSourceLabels`]: compare `G1` with `G2 # M⁻¹`.
//!   The operations use the source's labels and apply to it directly.
//!
//! Blank nodes left out of the mapping are moved to fresh labels so they
//! can never coincide with a label of the other graph by accident. Those
//! extra pairs are recorded in the script's mapping.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::matcher::{parse_mapping_line, BnodeMapping, Method};
use crate::ntriples::{parse_line, render_sorted};
use crate::rdf::{Graph, Renaming, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    ForwardIntoTargetLabels,
    ForwardIntoSourceLabels,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::ForwardIntoTargetLabels => Direction::ForwardIntoSourceLabels,
            Direction::ForwardIntoSourceLabels => Direction::ForwardIntoTargetLabels,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ForwardIntoTargetLabels => "target",
            Direction::ForwardIntoSourceLabels => "source",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaScript {
    additions: BTreeSet<Triple>,
    deletions: BTreeSet<Triple>,
    mapping_used: Option<BnodeMapping>,
    direction: Direction,
}

impl DeltaScript {
    pub fn empty() -> DeltaScript {
        DeltaScript {
            additions: BTreeSet::new(),
            deletions: BTreeSet::new(),
            mapping_used: None,
            direction: Direction::ForwardIntoTargetLabels,
        }
    }

    /// A script without mapping. Triples present in both sets cancel out.
    pub fn from_parts(
        additions: BTreeSet<Triple>,
        deletions: BTreeSet<Triple>,
        direction: Direction,
    ) -> DeltaScript {
        let both: BTreeSet<Triple> = additions.intersection(&deletions).cloned().collect();
        DeltaScript {
            additions: &additions - &both,
            deletions: &deletions - &both,
            mapping_used: None,
            direction,
        }
    }

    pub fn additions(&self) -> &BTreeSet<Triple> {
        &self.additions
    }

    pub fn deletions(&self) -> &BTreeSet<Triple> {
        &self.deletions
    }

    pub fn mapping_used(&self) -> Option<&BnodeMapping> {
        self.mapping_used.as_ref()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn size(&self) -> usize {
        self.additions.len() + self.deletions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// The same operations with the mapping dropped. Scripts in source
    /// labels apply identically; target-label scripts then apply verbatim.
    pub fn without_mapping(&self) -> DeltaScript {
        DeltaScript {
            mapping_used: None,
            ..self.clone()
        }
    }

    /// Blank node labels mentioned by any operation.
    pub fn labels(&self) -> BTreeSet<String> {
        self.additions
            .iter()
            .chain(&self.deletions)
            .flat_map(|t| [t.subject(), t.object()])
            .filter_map(|t| t.blank_label().map(str::to_string))
            .collect()
    }

    /// Delta file text: mapping lines, deletions, additions (each block
    /// sorted), then a trailer with the direction and, for mapped scripts,
    /// the mapping's cost and method.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.mapping_used {
            for (a, b) in m.pairs() {
                out.push_str(&format!("M {} {}\n", a.value(), b.value()));
            }
        }
        for line in render_sorted(&self.deletions) {
            out.push_str("D ");
            out.push_str(&line);
            out.push('\n');
        }
        for line in render_sorted(&self.additions) {
            out.push_str("A ");
            out.push_str(&line);
            out.push('\n');
        }
        match &self.mapping_used {
            Some(m) => out.push_str(&format!(
                "# direction={} cost={} method={}\n",
                self.direction,
                m.cost(),
                m.method()
            )),
            None => out.push_str(&format!("# direction={}\n", self.direction)),
        }
        out
    }

    pub fn parse(text: &str) -> Result<DeltaScript> {
        let mut pairs = Vec::new();
        let mut additions = BTreeSet::new();
        let mut deletions = BTreeSet::new();
        let mut direction = Direction::ForwardIntoTargetLabels;
        let mut mapped: Option<(usize, Method)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut cost = None;
                let mut method = None;
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("direction=") {
                        direction = match v {
                            "target" => Direction::ForwardIntoTargetLabels,
                            "source" => Direction::ForwardIntoSourceLabels,
                            other => {
                                return Err(Error::syntax(lineno, format!("unknown direction {other}")))
                            }
                        };
                    } else if let Some(v) = field.strip_prefix("cost=") {
                        cost = Some(v.parse().map_err(|_| Error::syntax(lineno, "bad cost"))?);
                    } else if let Some(v) = field.strip_prefix("method=") {
                        method = Some(v.parse().map_err(|e: String| Error::syntax(lineno, e))?);
                    }
                }
                if let (Some(c), Some(m)) = (cost, method) {
                    mapped = Some((c, m));
                }
                continue;
            }
            let (tag, body) = line.split_at(1);
            match tag {
                "M" => pairs.push(parse_mapping_line(line, lineno)?),
                "A" | "D" => {
                    let triple = parse_line(body, lineno)?
                        .ok_or_else(|| Error::syntax(lineno, "missing triple"))?;
                    if tag == "A" {
                        additions.insert(triple);
                    } else {
                        deletions.insert(triple);
                    }
                }
                _ => return Err(Error::syntax(lineno, format!("unknown operation '{tag}'"))),
            }
        }
        let mapping_used = match (mapped, pairs.is_empty()) {
            (Some((cost, method)), _) => Some(BnodeMapping::from_pairs(pairs, cost, method)?),
            (None, false) => Some(BnodeMapping::from_pairs(pairs, 0, Method::Given)?),
            (None, true) => None,
        };
        Ok(DeltaScript {
            additions,
            deletions,
            mapping_used,
            direction,
        })
    }
}

/// `Δe(G1 → G2)` with labels compared verbatim.
pub fn delta_plain(g1: &Graph, g2: &Graph) -> DeltaScript {
    DeltaScript {
        additions: g2.triples() - g1.triples(),
        deletions: g1.triples() - g2.triples(),
        mapping_used: None,
        direction: Direction::ForwardIntoTargetLabels,
    }
}

struct FreshLabels {
    taken: HashSet<String>,
    next: usize,
}

impl FreshLabels {
    fn new(g1: &Graph, g2: &Graph) -> FreshLabels {
        let taken = g1
            .bnodes()
            .into_iter()
            .chain(g2.bnodes())
            .map(|t| t.value().to_string())
            .collect();
        FreshLabels { taken, next: 0 }
    }

    fn take(&mut self) -> Term {
        loop {
            self.next += 1;
            let label = format!("f{}", self.next);
            if self.taken.insert(label.clone()) {
                return Term::Blank(label);
            }
        }
    }
}

/// `Δe(G1 → G2, M)` in the requested label scope. `mapping` must be an
/// injection from blank nodes of `g1` into blank nodes of `g2`.
pub fn delta_mapped(
    g1: &Graph,
    g2: &Graph,
    mapping: &BnodeMapping,
    direction: Direction,
) -> Result<DeltaScript> {
    let b1 = g1.bnodes();
    let b2 = g2.bnodes();
    let mut images = HashSet::new();
    for (a, b) in mapping.pairs() {
        if !b1.contains(a) {
            return Err(Error::ForeignBlankNode(a.to_string()));
        }
        if !b2.contains(b) {
            return Err(Error::ForeignBlankNode(b.to_string()));
        }
        if !images.insert(b) {
            return Err(Error::NotInjective(b.to_string()));
        }
    }
    let mut fresh = FreshLabels::new(g1, g2);
    let mut used: Vec<(Term, Term)> = mapping.pairs().iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    let (additions, deletions) = match direction {
        Direction::ForwardIntoTargetLabels => {
            for b in &b1 {
                if mapping.get(b).is_none() {
                    used.push((b.clone(), fresh.take()));
                }
            }
            let renamed = g1.rename(&Renaming::from_pairs(used.iter().cloned())?);
            (g2.triples() - renamed.triples(), renamed.triples() - g2.triples())
        }
        Direction::ForwardIntoSourceLabels => {
            let mapped: HashSet<&Term> = mapping.pairs().values().collect();
            for b in &b2 {
                if !mapped.contains(b) {
                    used.push((fresh.take(), b.clone()));
                }
            }
            let inverse = Renaming::from_pairs(used.iter().map(|(a, b)| (b.clone(), a.clone())))?;
            let renamed = g2.rename(&inverse);
            (renamed.triples() - g1.triples(), g1.triples() - renamed.triples())
        }
    };
    Ok(DeltaScript {
        additions,
        deletions,
        mapping_used: Some(BnodeMapping::from_pairs(used, mapping.cost(), mapping.method())?),
        direction,
    })
}

#[derive(Debug, Clone)]
pub struct Patched {
    pub graph: Graph,
    /// Deletions of triples that were not present.
    pub warnings: Vec<String>,
}

/// `(G \ deletions) ∪ additions`, after renaming `G` by the embedded
/// mapping when the script is expressed in target labels.
pub fn apply_delta(graph: &Graph, delta: &DeltaScript) -> Patched {
    let mut out = match (&delta.mapping_used, delta.direction) {
        (Some(m), Direction::ForwardIntoTargetLabels) => graph.rename(&m.to_renaming()),
        _ => graph.clone(),
    };
    let mut warnings = Vec::new();
    for t in &delta.deletions {
        if !out.remove(t) {
            warnings.push(format!("deleted triple not present: {t}"));
        }
    }
    out.extend(delta.additions.iter().cloned());
    Patched {
        graph: out,
        warnings,
    }
}

/// Swaps additions and deletions, inverts the mapping and flips the
/// direction: the reverse of `Δ(G1 → G2, M)` is the script of
/// `Δ(G2 → G1, M⁻¹)` in the other label scope, so it applies to `G2`.
pub fn reverse_delta(delta: &DeltaScript) -> DeltaScript {
    DeltaScript {
        additions: delta.deletions.clone(),
        deletions: delta.additions.clone(),
        mapping_used: delta.mapping_used.as_ref().map(BnodeMapping::inverse),
        direction: delta.direction.flipped(),
    }
}

/// One script with the net effect of `first` then `second`, both applied
/// verbatim in one label scope. Both scripts must be exact differences
/// (adding only absent and deleting only present triples), as every
/// computed delta is.
pub fn compose(first: &DeltaScript, second: &DeltaScript) -> DeltaScript {
    let additions = &(&first.additions - &second.deletions) | &(&second.additions - &first.deletions);
    let deletions = &(&first.deletions - &second.additions) | &(&second.deletions - &first.additions);
    DeltaScript {
        additions,
        deletions,
        mapping_used: None,
        direction: Direction::ForwardIntoTargetLabels,
    }
}
