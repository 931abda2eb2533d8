//! N-Triples reading and writing.
//!
//! Blank node labels are kept verbatim, so a parsed document forms one label
//! scope. Serialization sorts triples by their rendered
//! (subject, predicate, object) and is therefore a pure function of the set.

use std::collections::BTreeSet;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::rdf::{Graph, Term, Triple};

#[derive(Debug, Clone)]
pub struct ParseReport {
    pub graph: Graph,
    pub line_count: usize,
    pub bnode_labels: BTreeSet<String>,
    pub warnings: Vec<(usize, String)>,
}

pub fn parse_ntriples<R: BufRead>(input: R) -> Result<ParseReport> {
    let mut graph = Graph::new("");
    let mut bnode_labels = BTreeSet::new();
    let mut warnings = Vec::new();
    let mut line_count = 0;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::syntax(lineno, e.to_string()))?;
        line_count = lineno;
        let Some(triple) = parse_line(&line, lineno)? else {
            continue;
        };
        for term in [triple.subject(), triple.object()] {
            if let Term::Blank(label) = term {
                bnode_labels.insert(label.clone());
            }
        }
        if !graph.insert(triple) {
            warnings.push((lineno, "duplicate triple ignored".to_string()));
        }
    }
    Ok(ParseReport {
        graph,
        line_count,
        bnode_labels,
        warnings,
    })
}

pub fn parse_str(input: &str) -> Result<ParseReport> {
    parse_ntriples(input.as_bytes())
}

/// Parses a single N-Triples line. Blank and comment-only lines yield `None`.
pub fn parse_line(line: &str, lineno: usize) -> Result<Option<Triple>> {
    let mut cur = Cursor {
        src: line,
        pos: 0,
        line: lineno,
    };
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = match cur.peek() {
        Some('<') => cur.iri()?,
        Some('_') => cur.blank()?,
        Some('"') => return Err(cur.err("literal in subject position")),
        _ => return Err(cur.err("expected IRI or blank node as subject")),
    };
    cur.require_ws()?;
    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        Some('_') => return Err(cur.err("blank node in predicate position")),
        Some('"') => return Err(cur.err("literal in predicate position")),
        _ => return Err(cur.err("expected IRI as predicate")),
    };
    cur.require_ws()?;
    let object = match cur.peek() {
        Some('<') => cur.iri()?,
        Some('_') => cur.blank()?,
        Some('"') => cur.literal()?,
        _ => return Err(cur.err("expected object term")),
    };
    cur.skip_ws();
    if cur.next() != Some('.') {
        return Err(cur.err("expected '.' at end of triple"));
    }
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => {}
        Some(c) => return Err(cur.err(format!("unexpected '{c}' after triple"))),
    }
    Triple::new(subject, predicate, object)
        .map(Some)
        .map_err(|e| Error::syntax(lineno, e.to_string()))
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::syntax(self.line, message)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.next();
        }
    }

    fn require_ws(&mut self) -> Result<()> {
        if !matches!(self.peek(), Some(' ' | '\t')) {
            return Err(self.err("expected whitespace between terms"));
        }
        self.skip_ws();
        Ok(())
    }

    fn hex(&mut self, digits: usize) -> Result<char> {
        let mut value = 0u32;
        for _ in 0..digits {
            let d = self
                .next()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.err("bad unicode escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.err("escape is not a valid code point"))
    }

    fn iri(&mut self) -> Result<Term> {
        self.next();
        let mut value = String::new();
        loop {
            match self.next() {
                None => return Err(self.err("malformed IRI: missing '>'")),
                Some('>') => break,
                Some('\\') => match self.next() {
                    Some('u') => value.push(self.hex(4)?),
                    Some('U') => value.push(self.hex(8)?),
                    _ => return Err(self.err("malformed IRI: bad escape")),
                },
                Some(c @ (' ' | '\t' | '<' | '"' | '{' | '}' | '|' | '^' | '`')) => {
                    return Err(self.err(format!("malformed IRI: illegal character '{c}'")))
                }
                Some(c) if (c as u32) < 0x20 => {
                    return Err(self.err("malformed IRI: control character"))
                }
                Some(c) => value.push(c),
            }
        }
        if !value.contains(':') {
            return Err(self.err(format!("malformed IRI: <{value}> is not absolute")));
        }
        Ok(Term::Iri(value))
    }

    fn blank(&mut self) -> Result<Term> {
        self.next();
        if self.next() != Some(':') {
            return Err(self.err("expected '_:' blank node prefix"));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.next();
            } else {
                break;
            }
        }
        // A label never ends with '.'; give trailing dots back to the statement.
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let label = &self.src[start..self.pos];
        if label.is_empty() || label.starts_with(['-', '.']) {
            return Err(self.err("malformed blank node label"));
        }
        Ok(Term::Blank(label.to_string()))
    }

    fn literal(&mut self) -> Result<Term> {
        self.next();
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err(self.err("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.next() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex(4)?,
                        Some('U') => self.hex(8)?,
                        _ => return Err(self.err("bad escape in literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('^') => {
                self.next();
                if self.next() != Some('^') || self.peek() != Some('<') {
                    return Err(self.err("expected '^^<datatype>'"));
                }
                let Term::Iri(dt) = self.iri()? else { unreachable!() };
                Ok(Term::typed_literal(lexical, dt))
            }
            Some('@') => {
                self.next();
                let mut tag = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        tag.push(c);
                        self.next();
                    } else {
                        break;
                    }
                }
                if tag.is_empty() || !tag.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(self.err("malformed language tag"));
                }
                Ok(Term::lang_literal(lexical, tag))
            }
            _ => Ok(Term::literal(lexical)),
        }
    }
}

/// Renders one triple as an N-Triples statement without the newline.
pub fn render_triple(triple: &Triple) -> String {
    triple.to_string()
}

/// Sorted rendering of a set of triples, one statement per line.
pub fn render_sorted<'a, I>(triples: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a Triple>,
{
    let mut rows: Vec<(String, String, String)> = triples
        .into_iter()
        .map(|t| {
            (
                t.subject().to_string(),
                t.predicate().to_string(),
                t.object().to_string(),
            )
        })
        .collect();
    rows.sort();
    rows.into_iter()
        .map(|(s, p, o)| format!("{s} {p} {o} ."))
        .collect()
}

pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut out = String::new();
    for line in render_sorted(graph.iter()) {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
