//! Line-based dataset format.
//!
//! Each triple is one line: `<s> <p> <o> .` for the default graph and
//! `<s> <p> <o> <g> .` for a named graph. Any term may sit in any position.
//! A named graph that is defined but empty has no triples to carry it, so it
//! is written as the comment line `#graph <g>`, which ordinary N-Quads
//! readers skip. Output is canonical: default graph first, then named graphs
//! ordered by their rendered name, each graph's lines sorted.

use std::collections::BTreeMap;

use super::SyntaxError;
use crate::model::{is_language_tag, validate_iri, Atom, Dataset, Graph, Literal, Triple};

const EMPTY_GRAPH_DIRECTIVE: &str = "#graph ";

pub fn serialize_dataset(d: &Dataset) -> String {
    let mut out = String::new();
    let mut lines: Vec<String> = d.default_graph().iter().map(|t| format!("{t} .\n")).collect();
    lines.sort();
    lines.into_iter().for_each(|l| out.push_str(&l));

    let mut named: Vec<(String, &Graph)> = d.named_graphs().map(|(n, g)| (n.to_string(), g)).collect();
    named.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, graph) in named {
        if graph.is_empty() {
            out.push_str(EMPTY_GRAPH_DIRECTIVE);
            out.push_str(&name);
            out.push('\n');
            continue;
        }
        let mut lines: Vec<String> = graph.iter().map(|t| format!("{t} {name} .\n")).collect();
        lines.sort();
        lines.into_iter().for_each(|l| out.push_str(&l));
    }
    out
}

/// Serializes a single graph as default-graph lines.
pub fn serialize_graph(g: &Graph) -> String {
    let mut lines: Vec<String> = g.iter().map(|t| format!("{t} .\n")).collect();
    lines.sort();
    lines.concat()
}

pub fn parse_dataset(text: &str) -> Result<Dataset, SyntaxError> {
    let mut default = Graph::new();
    let mut named: BTreeMap<Atom, Graph> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(EMPTY_GRAPH_DIRECTIVE) {
            let mut cur = Cursor::new(rest, line_no, raw.len() - raw.trim_start().len() + EMPTY_GRAPH_DIRECTIVE.len());
            let name = cur.term()?;
            cur.skip_ws();
            if !cur.at_end() {
                return Err(cur.error("trailing content after graph name"));
            }
            named.entry(name).or_default();
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let mut cur = Cursor::new(line, line_no, raw.len() - raw.trim_start().len());
        let mut terms = Vec::with_capacity(4);
        loop {
            cur.skip_ws();
            if cur.peek() == Some('.') {
                cur.bump();
                break;
            }
            if cur.at_end() {
                return Err(cur.error("missing terminating '.'"));
            }
            if terms.len() == 4 {
                return Err(cur.error("expected '.' after graph name"));
            }
            terms.push(cur.term()?);
        }
        cur.skip_ws();
        if !cur.at_end() && cur.peek() != Some('#') {
            return Err(cur.error("trailing content after '.'"));
        }
        let mut it = terms.into_iter();
        let (s, p, o) = match (it.next(), it.next(), it.next()) {
            (Some(s), Some(p), Some(o)) => (s, p, o),
            _ => return Err(SyntaxError::new(line_no, 1, "expected at least three terms")),
        };
        let triple = Triple::new(s, p, o);
        match it.next() {
            None => {
                default.insert(triple);
            }
            Some(g) => {
                named.entry(g).or_default().insert(triple);
            }
        }
    }
    Ok(Dataset::from_parts(default, named))
}

/// Parses one term in N-Triples syntax, e.g. `<iri>` or `"x"@en`.
pub fn parse_term(text: &str) -> Result<Atom, SyntaxError> {
    let mut cur = Cursor::new(text.trim(), 1, 0);
    let t = cur.term()?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("trailing content after term"));
    }
    Ok(t)
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col_offset: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize, col_offset: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            col_offset,
            _src: src,
        }
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line, self.col_offset + self.pos + 1, msg)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c == ' ' || c == '\t') {
            self.pos += 1;
        }
    }

    fn iri(&mut self) -> Result<String, SyntaxError> {
        let start = self.pos;
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) => s.push(c),
                None => {
                    self.pos = start;
                    return Err(self.error("unterminated IRI"));
                }
            }
        }
        validate_iri(&s).map_err(|e| {
            self.pos = start;
            self.error(e.to_string())
        })?;
        Ok(s)
    }

    fn term(&mut self) -> Result<Atom, SyntaxError> {
        match self.peek() {
            Some('<') => Ok(Atom::Iri(self.iri()?)),
            Some('"') => {
                self.bump();
                let mut lex = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => {
                            let esc = self.bump().ok_or_else(|| self.error("dangling escape"))?;
                            match esc {
                                'n' => lex.push('\n'),
                                'r' => lex.push('\r'),
                                't' => lex.push('\t'),
                                '"' => lex.push('"'),
                                '\\' => lex.push('\\'),
                                'u' | 'U' => {
                                    let n = if esc == 'u' { 4 } else { 8 };
                                    let hex: String = (0..n).filter_map(|_| self.bump()).collect();
                                    let ch = u32::from_str_radix(&hex, 16)
                                        .ok()
                                        .and_then(char::from_u32)
                                        .ok_or_else(|| self.error(format!("bad unicode escape {hex:?}")))?;
                                    lex.push(ch);
                                }
                                other => return Err(self.error(format!("unknown escape \\{other}"))),
                            }
                        }
                        Some(c) => lex.push(c),
                        None => return Err(self.error("unterminated literal")),
                    }
                }
                match self.peek() {
                    Some('@') => {
                        self.bump();
                        let start = self.pos;
                        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                            self.bump();
                        }
                        let tag: String = self.chars[start..self.pos].iter().collect();
                        if !is_language_tag(&tag) {
                            return Err(self.error(format!("invalid language tag {tag:?}")));
                        }
                        Ok(Atom::Literal(Literal::with_language(lex, tag).expect("validated")))
                    }
                    Some('^') => {
                        self.bump();
                        if self.bump() != Some('^') || self.peek() != Some('<') {
                            return Err(self.error("expected ^^<datatype>"));
                        }
                        let dt = self.iri()?;
                        Ok(Atom::Literal(Literal::typed(lex, dt)))
                    }
                    _ => Ok(Atom::Literal(Literal::simple(lex))),
                }
            }
            Some(c) => Err(self.error(format!("unexpected character {c:?}"))),
            None => Err(self.error("expected a term")),
        }
    }
}
