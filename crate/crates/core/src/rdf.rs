//! Terms, triples, graphs and the renaming operator over resources.
//!
//! A [`Graph`] is a set of [`Triple`]s. Blank node labels are only meaningful
//! inside the graph that carries them; comparing labels across graphs is the
//! matcher's business, never the data model's.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Optional annotation of a literal. A literal has a datatype or a language
/// tag, never both.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LiteralKind {
    Plain,
    Typed(String),
    Lang(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Term {
        Term::Iri(value.into())
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::Blank(label.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Plain,
        })
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Typed(datatype.into()),
        })
    }

    pub fn lang_literal(lexical: impl Into<String>, tag: impl Into<String>) -> Term {
        Term::Literal(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Lang(tag.into()),
        })
    }

    /// Builds a literal from optional datatype and language tag, rejecting
    /// the combination of both.
    pub fn literal_with(
        lexical: impl Into<String>,
        datatype: Option<String>,
        langtag: Option<String>,
    ) -> Result<Term> {
        let kind = match (datatype, langtag) {
            (Some(_), Some(_)) => return Err(Error::LiteralAnnotation),
            (Some(dt), None) => LiteralKind::Typed(dt),
            (None, Some(tag)) => LiteralKind::Lang(tag),
            (None, None) => LiteralKind::Plain,
        };
        Ok(Term::Literal(Literal {
            lexical: lexical.into(),
            kind,
        }))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// IRI text, blank node label or lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::Blank(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }

    pub fn blank_label(&self) -> Option<&str> {
        match self {
            Term::Blank(l) => Some(l),
            _ => None,
        }
    }
}

pub(crate) fn escape_literal(out: &mut impl fmt::Write, lexical: &str) -> fmt::Result {
    for c in lexical.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\r' => out.write_str("\\r")?,
            '\t' => out.write_str("\\t")?,
            c => out.write_char(c)?,
        }
    }
    Ok(())
}

/// N-Triples rendering.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::Blank(l) => write!(f, "_:{l}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                escape_literal(f, &lit.lexical)?;
                f.write_str("\"")?;
                match &lit.kind {
                    LiteralKind::Plain => Ok(()),
                    LiteralKind::Typed(dt) => write!(f, "^^<{dt}>"),
                    LiteralKind::Lang(tag) => write!(f, "@{tag}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple> {
        if subject.is_literal() {
            return Err(Error::InvalidTriple {
                position: "subject",
                term: subject.to_string(),
            });
        }
        if !predicate.is_iri() {
            return Err(Error::InvalidTriple {
                position: "predicate",
                term: predicate.to_string(),
            });
        }
        for t in [&subject, &object] {
            if let Term::Blank(l) = t {
                if l.is_empty() {
                    return Err(Error::EmptyBlankLabel);
                }
            }
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn mentions(&self, term: &Term) -> bool {
        &self.subject == term || &self.object == term
    }

    pub fn has_blank(&self) -> bool {
        self.subject.is_blank() || self.object.is_blank()
    }

    pub fn apply(&self, renaming: &Renaming) -> Triple {
        let subject = renaming.image(&self.subject).clone();
        let object = renaming.image(&self.object).clone();
        debug_assert!(!subject.is_literal());
        Triple {
            subject,
            predicate: self.predicate.clone(),
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A partial function over resources (IRIs and blank nodes), applied to
/// subject and object positions simultaneously.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Renaming {
    pairs: BTreeMap<Term, Term>,
}

impl Renaming {
    pub fn new() -> Renaming {
        Renaming::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Renaming>
    where
        I: IntoIterator<Item = (Term, Term)>,
    {
        let mut r = Renaming::new();
        for (from, to) in pairs {
            r.insert(from, to)?;
        }
        Ok(r)
    }

    pub fn insert(&mut self, from: Term, to: Term) -> Result<Option<Term>> {
        for t in [&from, &to] {
            if t.is_literal() {
                return Err(Error::LiteralInRenaming(t.clone()));
            }
        }
        Ok(self.pairs.insert(from, to))
    }

    pub fn get(&self, term: &Term) -> Option<&Term> {
        self.pairs.get(term)
    }

    pub fn image<'a>(&'a self, term: &'a Term) -> &'a Term {
        self.pairs.get(term).unwrap_or(term)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.pairs.iter()
    }
}

/// `t # F`
pub fn apply_renaming_triple(triple: &Triple, renaming: &Renaming) -> Triple {
    triple.apply(renaming)
}

/// `G # F`; may shrink the graph when the renaming merges triples.
pub fn apply_renaming_graph(graph: &Graph, renaming: &Renaming) -> Graph {
    graph.rename(renaming)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    id: String,
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new(id: impl Into<String>) -> Graph {
        Graph {
            id: id.into(),
            triples: BTreeSet::new(),
        }
    }

    pub fn from_triples<I: IntoIterator<Item = Triple>>(id: impl Into<String>, triples: I) -> Graph {
        Graph {
            id: id.into(),
            triples: triples.into_iter().collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    /// Set equality of triples, ignoring the graph id. Labels are compared
    /// verbatim.
    pub fn same_triples(&self, other: &Graph) -> bool {
        self.triples == other.triples
    }

    fn terms_where(&self, pred: impl Fn(&Term) -> bool) -> BTreeSet<Term> {
        self.triples
            .iter()
            .flat_map(|t| t.terms())
            .filter(|t| pred(t))
            .cloned()
            .collect()
    }

    pub fn iris(&self) -> BTreeSet<Term> {
        self.terms_where(Term::is_iri)
    }

    pub fn bnodes(&self) -> BTreeSet<Term> {
        self.terms_where(Term::is_blank)
    }

    pub fn literals(&self) -> BTreeSet<Term> {
        self.terms_where(Term::is_literal)
    }

    /// Triples whose subject or object is `bnode`.
    pub fn triples_of(&self, bnode: &Term) -> Result<BTreeSet<Triple>> {
        if !bnode.is_blank() {
            return Err(Error::NotABlankNode(bnode.clone()));
        }
        Ok(self
            .triples
            .iter()
            .filter(|t| t.mentions(bnode))
            .cloned()
            .collect())
    }

    /// Triples that mention no blank node.
    pub fn ground_triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter().filter(|t| !t.has_blank())
    }

    /// Partition of the blank nodes into groups that are directly connected
    /// (one triple with blank nodes in both subject and object), closed
    /// transitively. Groups come out sorted by their smallest member.
    pub fn bnode_components(&self) -> Vec<BTreeSet<Term>> {
        let nodes: Vec<Term> = self.bnodes().into_iter().collect();
        let index: BTreeMap<&Term, usize> = nodes.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut parent: Vec<usize> = (0..nodes.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for t in &self.triples {
            if let (Some(&a), Some(&b)) = (index.get(t.subject()), index.get(t.object())) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<Term>> = BTreeMap::new();
        for (i, term) in nodes.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().insert(term.clone());
        }
        groups.into_values().collect()
    }

    /// True when some triple links two distinct blank nodes.
    pub fn has_connected_bnodes(&self) -> bool {
        self.triples
            .iter()
            .any(|t| t.subject().is_blank() && t.object().is_blank() && t.subject() != t.object())
    }

    pub fn rename(&self, renaming: &Renaming) -> Graph {
        if renaming.is_empty() {
            return self.clone();
        }
        Graph {
            id: self.id.clone(),
            triples: self.triples.iter().map(|t| t.apply(renaming)).collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://ex/{s}"))
    }

    fn t(s: Term, p: &str, o: Term) -> Triple {
        Triple::new(s, iri(p), o).unwrap()
    }

    #[test]
    fn renaming_cases() {
        let (a, b, c, d) = (iri("a"), iri("b"), iri("c"), iri("d"));
        let tr = t(a.clone(), "b", c.clone());
        let f = Renaming::from_pairs([(c.clone(), d.clone())]).unwrap();
        assert_eq!(tr.apply(&f), t(a.clone(), "b", d));

        let f = Renaming::from_pairs([(iri("e"), iri("f"))]).unwrap();
        assert_eq!(tr.apply(&f), tr);

        let looped = t(a.clone(), "p", a.clone());
        let k = iri("k");
        let f = Renaming::from_pairs([(a, k.clone())]).unwrap();
        assert_eq!(looped.apply(&f), t(k.clone(), "p", k));
        let _ = b;
    }

    #[test]
    fn predicate_is_never_renamed() {
        let tr = t(iri("a"), "p", iri("b"));
        let f = Renaming::from_pairs([(iri("p"), iri("q"))]).unwrap();
        assert_eq!(tr.apply(&f), tr);
    }

    #[test]
    fn renaming_is_simultaneous() {
        let (a, b, c) = (Term::blank("a"), Term::blank("b"), Term::blank("c"));
        let f = Renaming::from_pairs([(a.clone(), b.clone()), (b.clone(), c.clone())]).unwrap();
        assert_eq!(t(a, "p", b.clone()).apply(&f), t(b, "p", c));
    }

    #[test]
    fn graph_renaming_collapses() {
        let g = Graph::from_triples("g", [t(iri("a"), "p", iri("b")), t(iri("c"), "p", iri("b"))]);
        let f = Renaming::from_pairs([(iri("a"), iri("c"))]).unwrap();
        let r = apply_renaming_graph(&g, &f);
        assert_eq!(r.len(), 1);
        assert!(r.contains(&t(iri("c"), "p", iri("b"))));
        assert!(apply_renaming_graph(&Graph::new("e"), &f).is_empty());
    }

    #[test]
    fn literal_rejected_in_renaming() {
        assert!(matches!(
            Renaming::from_pairs([(Term::literal("x"), iri("a"))]),
            Err(Error::LiteralInRenaming(_))
        ));
        assert!(Renaming::from_pairs([(iri("a"), Term::literal("x"))]).is_err());
    }

    #[test]
    fn triple_positions_checked() {
        assert!(Triple::new(Term::literal("x"), iri("p"), iri("o")).is_err());
        assert!(Triple::new(iri("s"), Term::blank("b"), iri("o")).is_err());
        assert!(Triple::new(Term::blank(""), iri("p"), iri("o")).is_err());
        assert!(Term::literal_with("x", Some("dt".into()), Some("en".into())).is_err());
    }

    #[test]
    fn triples_of_self_loop_and_absent() {
        let x = Term::blank("x");
        let g = Graph::from_triples("g", [t(x.clone(), "p", x.clone())]);
        assert_eq!(g.triples_of(&x).unwrap().len(), 1);
        assert!(g.triples_of(&Term::blank("fresh")).unwrap().is_empty());
        assert!(matches!(g.triples_of(&iri("a")), Err(Error::NotABlankNode(_))));
    }

    #[test]
    fn components() {
        let (a, b, c) = (Term::blank("a"), Term::blank("b"), Term::blank("c"));
        let g = Graph::from_triples(
            "g",
            [
                t(a.clone(), "p", b.clone()),
                t(c.clone(), "p", Term::literal("v")),
                t(c.clone(), "q", c.clone()),
            ],
        );
        let comps = g.bnode_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], [a, b].into_iter().collect());
        assert!(g.has_connected_bnodes());
        let g = Graph::from_triples("g", [t(iri("a"), "p", iri("b"))]);
        assert!(g.bnode_components().is_empty());
    }

    #[test]
    fn literal_rendering_escapes() {
        let l = Term::literal("a\"b\\c\nd\te");
        assert_eq!(l.to_string(), r#""a\"b\\c\nd\te""#);
        assert_eq!(Term::lang_literal("x", "en").to_string(), "\"x\"@en");
        assert_eq!(Term::typed_literal("1", "http://dt").to_string(), "\"1\"^^<http://dt>");
    }
}
