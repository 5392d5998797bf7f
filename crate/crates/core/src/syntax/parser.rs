//! Recursive-descent parser for the SPARQL subset.
//!
//! Group graph patterns are translated into the algebra the same way SPARQL
//! does: consecutive triples and `GRAPH` blocks accumulate into one basic
//! pattern, nested groups join, `OPTIONAL` left-joins everything parsed so
//! far, and the filters of a group apply to the whole group.

use std::collections::{BTreeMap, HashMap};

use uuid::Uuid;

use super::ast::*;
use super::SyntaxError;
use crate::model::{is_language_tag, validate_iri, Atom, GraphName, Literal};

pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const SKOLEM_PREFIX: &str = "urn:skolem:";

/// Maps blank-node labels to minted IRIs for one statement.
///
/// A fresh skolemizer mints `urn:skolem:<uuid4>` for each new label. One
/// seeded with earlier bindings reproduces them, which is how a recorded
/// statement is replayed with the same identifiers.
#[derive(Debug, Clone, Default)]
pub struct Skolemizer {
    bindings: BTreeMap<String, String>,
}

impl Skolemizer {
    pub fn new() -> Self {
        Skolemizer::default()
    }

    pub fn with_bindings(bindings: BTreeMap<String, String>) -> Self {
        Skolemizer { bindings }
    }

    pub fn bindings(&self) -> &BTreeMap<String, String> {
        &self.bindings
    }

    pub fn into_bindings(self) -> BTreeMap<String, String> {
        self.bindings
    }

    fn resolve(&mut self, label: &str) -> Atom {
        let iri = self
            .bindings
            .entry(label.to_string())
            .or_insert_with(|| format!("{SKOLEM_PREFIX}{}", Uuid::new_v4()));
        Atom::iri(iri.clone())
    }
}

pub fn parse_query(text: &str) -> Result<Query, SyntaxError> {
    parse_query_with(text, &mut Skolemizer::new())
}

pub fn parse_query_with(text: &str, skolem: &mut Skolemizer) -> Result<Query, SyntaxError> {
    let mut p = Parser::new(text, skolem)?;
    p.prologue()?;
    let q = p.query()?;
    p.expect_eof()?;
    Ok(q)
}

pub fn parse_update(text: &str) -> Result<Update, SyntaxError> {
    parse_update_with(text, &mut Skolemizer::new())
}

pub fn parse_update_with(text: &str, skolem: &mut Skolemizer) -> Result<Update, SyntaxError> {
    let mut p = Parser::new(text, skolem)?;
    p.prologue()?;
    let u = p.update()?;
    p.expect_eof()?;
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Blank(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Word(String),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Iri(i) => format!("<{i}>"),
            Tok::PName(p, l) => format!("{p}:{l}"),
            Tok::Var(v) => format!("?{v}"),
            Tok::Blank(b) => format!("_:{b}"),
            Tok::Str(_) => "string literal".into(),
            Tok::LangTag(t) => format!("@{t}"),
            Tok::Integer(i) => i.clone(),
            Tok::Word(w) => w.clone(),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let err = |msg: String| SyntaxError::new(start_line, start_col, msg);
        let tok = match c {
            '<' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' && !chars[j].is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '>' {
                    let iri: String = chars[i + 1..j].iter().collect();
                    validate_iri(&iri).map_err(|e| err(e.to_string()))?;
                    while i <= j {
                        advance!();
                    }
                    Tok::Iri(iri)
                } else {
                    return Err(err("unterminated IRI".into()));
                }
            }
            '?' | '$' => {
                advance!();
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance!();
                }
                let name: String = chars[start..i].iter().collect();
                if !is_variable_name(&name) {
                    return Err(err(format!("invalid variable name {name:?}")));
                }
                Tok::Var(name)
            }
            '"' => {
                advance!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() || chars[i] == '\n' {
                        return Err(err("unterminated string literal".into()));
                    }
                    match chars[i] {
                        '"' => {
                            advance!();
                            break;
                        }
                        '\\' => {
                            advance!();
                            let e = chars.get(i).copied().ok_or_else(|| err("dangling escape".into()))?;
                            advance!();
                            match e {
                                'n' => s.push('\n'),
                                'r' => s.push('\r'),
                                't' => s.push('\t'),
                                '"' => s.push('"'),
                                '\'' => s.push('\''),
                                '\\' => s.push('\\'),
                                'u' | 'U' => {
                                    let n = if e == 'u' { 4 } else { 8 };
                                    if i + n > chars.len() {
                                        return Err(err("truncated unicode escape".into()));
                                    }
                                    let hex: String = chars[i..i + n].iter().collect();
                                    let ch = u32::from_str_radix(&hex, 16)
                                        .ok()
                                        .and_then(char::from_u32)
                                        .ok_or_else(|| err(format!("bad unicode escape \\{e}{hex}")))?;
                                    for _ in 0..n {
                                        advance!();
                                    }
                                    s.push(ch);
                                }
                                other => return Err(err(format!("unknown escape \\{other}"))),
                            }
                        }
                        ch => {
                            s.push(ch);
                            advance!();
                        }
                    }
                }
                Tok::Str(s)
            }
            '@' => {
                advance!();
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '-') {
                    advance!();
                }
                let tag: String = chars[start..i].iter().collect();
                if !is_language_tag(&tag) {
                    return Err(err(format!("invalid language tag {tag:?}")));
                }
                Tok::LangTag(tag)
            }
            '_' if chars.get(i + 1) == Some(&':') => {
                advance!();
                advance!();
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    advance!();
                }
                if start == i {
                    return Err(err("empty blank node label".into()));
                }
                Tok::Blank(chars[start..i].iter().collect())
            }
            '{' | '}' | '(' | ')' | '.' | ';' | ',' | '=' | '*' => {
                advance!();
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '.' => ".",
                    ';' => ";",
                    ',' => ",",
                    '=' => "=",
                    _ => "*",
                })
            }
            '!' => {
                advance!();
                if chars.get(i) == Some(&'=') {
                    advance!();
                    Tok::Punct("!=")
                } else {
                    Tok::Punct("!")
                }
            }
            '&' | '|' | '^' => {
                if chars.get(i + 1) != Some(&c) {
                    return Err(err(format!("unexpected character {c:?}")));
                }
                advance!();
                advance!();
                Tok::Punct(match c {
                    '&' => "&&",
                    '|' => "||",
                    _ => "^^",
                })
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                advance!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!();
                }
                Tok::Integer(chars[start..i].iter().collect())
            }
            c if c.is_alphabetic() || c == ':' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    advance!();
                }
                let word: String = chars[start..i].iter().collect();
                if chars.get(i) == Some(&':') {
                    advance!();
                    let local_start = i;
                    while i < chars.len()
                        && (chars[i].is_alphanumeric()
                            || chars[i] == '_'
                            || chars[i] == '-'
                            || (chars[i] == '.' && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())))
                    {
                        advance!();
                    }
                    Tok::PName(word, chars[local_start..i].iter().collect())
                } else {
                    Tok::Word(word)
                }
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    skolem: &'s mut Skolemizer,
}

impl<'s> Parser<'s> {
    fn new(text: &str, skolem: &'s mut Skolemizer) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            prefixes: HashMap::new(),
            skolem,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError::new(s.line, s.column, msg)
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{p}'")))
        }
    }

    fn expect_eof(&mut self) -> Result<(), SyntaxError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn prologue(&mut self) -> Result<(), SyntaxError> {
        while self.eat_keyword("PREFIX") {
            let prefix = match self.bump() {
                Tok::PName(p, l) if l.is_empty() => p,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("prefix declaration like `ex:`"));
                }
            };
            match self.bump() {
                Tok::Iri(iri) => {
                    self.prefixes.insert(prefix, iri);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("IRI"));
                }
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, SyntaxError> {
        if self.eat_keyword("SELECT") {
            let mut vars = Vec::new();
            let star = self.eat_punct("*");
            if !star {
                while let Tok::Var(name) = self.peek().clone() {
                    let v = Variable::new(name);
                    if vars.contains(&v) {
                        return Err(self.error(format!("duplicate projection variable {v}")));
                    }
                    vars.push(v);
                    self.bump();
                }
                if vars.is_empty() {
                    return Err(self.unexpected("projection variable or '*'"));
                }
            }
            self.eat_keyword("WHERE");
            let body = self.group()?;
            if star {
                vars = body.vars().into_iter().collect();
            }
            Ok(Query::Select { vars, body })
        } else if self.eat_keyword("CONSTRUCT") {
            let template = self.template()?;
            self.eat_keyword("WHERE");
            let body = self.group()?;
            Ok(Query::Construct { template, body })
        } else {
            Err(self.unexpected("SELECT or CONSTRUCT"))
        }
    }

    fn update(&mut self) -> Result<Update, SyntaxError> {
        if self.eat_keyword("INSERT") {
            if self.eat_keyword("DATA") {
                let template = self.ground_template()?;
                return Ok(Update::InsertWhere {
                    template,
                    pattern: Pattern::empty(),
                });
            }
            let template = self.template()?;
            self.expect_keyword("WHERE")?;
            let pattern = self.group()?;
            Ok(Update::InsertWhere { template, pattern })
        } else if self.eat_keyword("DELETE") {
            if self.eat_keyword("DATA") {
                let template = self.ground_template()?;
                return Ok(Update::DeleteWhere {
                    template,
                    pattern: Pattern::empty(),
                });
            }
            if self.eat_keyword("WHERE") {
                let template = self.template()?;
                return Ok(Update::DeleteWhere {
                    pattern: Pattern::Basic(template.clone()),
                    template,
                });
            }
            let delete = self.template()?;
            if self.eat_keyword("INSERT") {
                let insert = self.template()?;
                self.expect_keyword("WHERE")?;
                let pattern = self.group()?;
                return Ok(Update::DeleteInsertWhere { delete, insert, pattern });
            }
            self.expect_keyword("WHERE")?;
            let pattern = self.group()?;
            Ok(Update::DeleteWhere { template: delete, pattern })
        } else if self.eat_keyword("LOAD") {
            let source = if self.eat_keyword("DEFAULT") {
                GraphName::Default
            } else {
                GraphName::Named(self.iri()?)
            };
            let target = if self.eat_keyword("INTO") {
                self.graph_ref()?
            } else {
                GraphName::Default
            };
            Ok(Update::Load { source, target })
        } else if self.eat_keyword("CLEAR") {
            Ok(Update::Clear(self.graph_ref()?))
        } else if self.eat_keyword("CREATE") {
            Ok(Update::Create(self.graph_ref()?))
        } else if self.eat_keyword("DROP") {
            Ok(Update::Drop(self.graph_ref()?))
        } else if self.is_keyword("COPY") || self.is_keyword("MOVE") || self.is_keyword("ADD") {
            let verb = match self.bump() {
                Tok::Word(w) => w.to_ascii_uppercase(),
                _ => unreachable!(),
            };
            let source = self.graph_or_default()?;
            self.expect_keyword("TO")?;
            let target = self.graph_or_default()?;
            Ok(match verb.as_str() {
                "COPY" => Update::Copy { source, target },
                "MOVE" => Update::Move { source, target },
                _ => Update::Add { source, target },
            })
        } else {
            Err(self.unexpected("an update keyword (INSERT, DELETE, LOAD, CLEAR, CREATE, DROP, COPY, MOVE, ADD)"))
        }
    }

    /// `GRAPH <iri>` or `DEFAULT`.
    fn graph_ref(&mut self) -> Result<GraphName, SyntaxError> {
        if self.eat_keyword("DEFAULT") {
            Ok(GraphName::Default)
        } else if self.eat_keyword("GRAPH") {
            Ok(GraphName::Named(self.iri()?))
        } else {
            Err(self.unexpected("GRAPH <iri> or DEFAULT"))
        }
    }

    /// `[GRAPH] <iri>` or `DEFAULT`.
    fn graph_or_default(&mut self) -> Result<GraphName, SyntaxError> {
        if self.eat_keyword("DEFAULT") {
            return Ok(GraphName::Default);
        }
        self.eat_keyword("GRAPH");
        Ok(GraphName::Named(self.iri()?))
    }

    fn iri(&mut self) -> Result<Atom, SyntaxError> {
        match self.peek().clone() {
            Tok::Iri(iri) => {
                self.bump();
                Ok(Atom::iri(iri))
            }
            Tok::PName(p, l) => {
                let atom = self.expand(&p, &l)?;
                self.bump();
                Ok(atom)
            }
            _ => Err(self.unexpected("IRI")),
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<Atom, SyntaxError> {
        let base = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.error(format!("undeclared prefix {prefix:?}")))?;
        let iri = format!("{base}{local}");
        validate_iri(&iri).map_err(|e| self.error(e.to_string()))?;
        Ok(Atom::iri(iri))
    }

    fn term(&mut self) -> Result<TermPattern, SyntaxError> {
        let tp = match self.peek().clone() {
            Tok::Iri(_) | Tok::PName(..) => return self.iri().map(TermPattern::Atom),
            Tok::Var(name) => TermPattern::Var(Variable::new(name)),
            Tok::Blank(label) => TermPattern::Atom(self.skolem.resolve(&label)),
            Tok::Integer(n) => TermPattern::Atom(Atom::Literal(Literal::typed(n, XSD_INTEGER))),
            Tok::Word(w) if w == "true" || w == "false" => TermPattern::Atom(Atom::Literal(Literal::typed(w, XSD_BOOLEAN))),
            Tok::Str(s) => {
                self.bump();
                let lit = if let Tok::LangTag(tag) = self.peek().clone() {
                    self.bump();
                    Literal::with_language(s, tag).map_err(|e| self.error(e.to_string()))?
                } else if self.eat_punct("^^") {
                    let dt = self.iri()?;
                    Literal::typed(s, dt.as_iri().unwrap_or_default())
                } else {
                    Literal::simple(s)
                };
                return Ok(TermPattern::Atom(Atom::Literal(lit)));
            }
            _ => return Err(self.unexpected("term")),
        };
        self.bump();
        Ok(tp)
    }

    fn predicate(&mut self) -> Result<TermPattern, SyntaxError> {
        if matches!(self.peek(), Tok::Word(w) if w == "a") {
            self.bump();
            return Ok(TermPattern::iri(RDF_TYPE));
        }
        self.term()
    }

    fn starts_term(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Iri(_) | Tok::PName(..) | Tok::Var(_) | Tok::Blank(_) | Tok::Str(_) | Tok::Integer(_)
        ) || matches!(self.peek(), Tok::Word(w) if w == "true" || w == "false")
    }

    /// `s p o (, o)* (; p o (, o)*)*`
    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), SyntaxError> {
        let subject = self.term()?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.term()?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                break;
            }
            // a trailing ';' is allowed before '.' or '}'
            if self.is_punct(".") || self.is_punct("}") {
                break;
            }
        }
        Ok(())
    }

    /// Body of a `GRAPH` block: triple patterns only.
    fn graph_body(&mut self) -> Result<Vec<TriplePattern>, SyntaxError> {
        self.expect_punct("{")?;
        let mut triples = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(triples);
            }
            if self.starts_term() {
                self.triples_same_subject(&mut triples)?;
                if !self.eat_punct(".") && !self.is_punct("}") {
                    return Err(self.nested_or_unexpected());
                }
                continue;
            }
            return Err(self.nested_or_unexpected());
        }
    }

    fn nested_or_unexpected(&self) -> SyntaxError {
        let nested = self.is_keyword("FILTER")
            || self.is_keyword("OPTIONAL")
            || self.is_keyword("UNION")
            || self.is_keyword("GRAPH")
            || self.is_punct("{");
        if nested {
            let s = &self.toks[self.pos];
            SyntaxError::nested(s.line, s.column, self.peek().describe())
        } else {
            self.unexpected("triple pattern or '}'")
        }
    }

    /// `{ (triples | GRAPH term { triples })* }` as used by CONSTRUCT and
    /// update templates.
    fn template(&mut self) -> Result<BasicPattern, SyntaxError> {
        self.expect_punct("{")?;
        let mut bp = BasicPattern::new();
        loop {
            if self.eat_punct("}") {
                return Ok(bp);
            }
            if self.eat_keyword("GRAPH") {
                let name = self.term()?;
                let triples = self.graph_body()?;
                bp.push_graph(name, triples);
                self.eat_punct(".");
            } else if self.starts_term() {
                let mut triples = Vec::new();
                self.triples_same_subject(&mut triples)?;
                triples.into_iter().for_each(|t| bp.push_triple(t));
                if !self.eat_punct(".") && !self.is_punct("}") && !self.is_keyword("GRAPH") {
                    return Err(self.unexpected("'.' or '}'"));
                }
            } else {
                return Err(self.unexpected("triple pattern, GRAPH or '}'"));
            }
        }
    }

    fn ground_template(&mut self) -> Result<BasicPattern, SyntaxError> {
        let start = self.pos;
        let bp = self.template()?;
        if let Some(v) = bp.vars().into_iter().next() {
            let s = &self.toks[start];
            return Err(SyntaxError::new(s.line, s.column, format!("variable {v} not allowed in DATA block")));
        }
        Ok(bp)
    }

    fn group(&mut self) -> Result<Pattern, SyntaxError> {
        self.expect_punct("{")?;
        let mut acc: Option<Pattern> = None;
        let mut pending = BasicPattern::new();
        let mut filters = Vec::new();

        fn flush(acc: &mut Option<Pattern>, pending: &mut BasicPattern) {
            if !pending.is_empty() {
                let bp = Pattern::Basic(std::mem::take(pending));
                *acc = Some(match acc.take() {
                    None => bp,
                    Some(a) => a.join(bp),
                });
            }
        }

        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                continue;
            }
            if self.eat_keyword("GRAPH") {
                let name = self.term()?;
                if matches!(name, TermPattern::Atom(Atom::Literal(_))) {
                    return Err(self.error("graph name must be an IRI or a variable"));
                }
                let triples = self.graph_body()?;
                pending.push_graph(name, triples);
            } else if self.eat_keyword("OPTIONAL") {
                let right = self.group()?;
                flush(&mut acc, &mut pending);
                acc = Some(acc.take().unwrap_or_else(Pattern::empty).optional(right));
            } else if self.eat_keyword("FILTER") {
                filters.push(self.constraint()?);
            } else if self.is_punct("{") {
                let mut p = self.group()?;
                while self.eat_keyword("UNION") {
                    p = p.union(self.group()?);
                }
                flush(&mut acc, &mut pending);
                acc = Some(match acc.take() {
                    None => p,
                    Some(a) => a.join(p),
                });
            } else if self.starts_term() {
                let mut triples = Vec::new();
                self.triples_same_subject(&mut triples)?;
                triples.into_iter().for_each(|t| pending.push_triple(t));
            } else {
                return Err(self.unexpected("triple pattern, GRAPH, OPTIONAL, FILTER, '{' or '}'"));
            }
        }
        flush(&mut acc, &mut pending);
        let mut p = acc.unwrap_or_else(Pattern::empty);
        for f in filters {
            p = p.filter(f);
        }
        Ok(p)
    }

    fn constraint(&mut self) -> Result<Condition, SyntaxError> {
        if self.is_punct("(") {
            self.bump();
            let c = self.or_expr()?;
            self.expect_punct(")")?;
            Ok(c)
        } else if self.is_keyword("BOUND") {
            self.primary()
        } else {
            Err(self.unexpected("'(' or BOUND after FILTER"))
        }
    }

    fn or_expr(&mut self) -> Result<Condition, SyntaxError> {
        let mut c = self.and_expr()?;
        while self.eat_punct("||") {
            c = c.or(self.and_expr()?);
        }
        Ok(c)
    }

    fn and_expr(&mut self) -> Result<Condition, SyntaxError> {
        let mut c = self.unary()?;
        while self.eat_punct("&&") {
            c = c.and(self.unary()?);
        }
        Ok(c)
    }

    fn unary(&mut self) -> Result<Condition, SyntaxError> {
        if self.eat_punct("!") {
            return Ok(self.unary()?.not());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Condition, SyntaxError> {
        if self.eat_punct("(") {
            let c = self.or_expr()?;
            self.expect_punct(")")?;
            return Ok(c);
        }
        if self.is_keyword("BOUND") && matches!(self.peek_at(1), Tok::Punct("(")) {
            self.bump();
            self.bump();
            let v = match self.bump() {
                Tok::Var(name) => Variable::new(name),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("variable"));
                }
            };
            self.expect_punct(")")?;
            return Ok(Condition::Bound(v));
        }
        let lhs = self.term()?;
        if self.eat_punct("=") {
            Ok(Condition::Equal(lhs, self.term()?))
        } else if self.eat_punct("!=") {
            Ok(Condition::Equal(lhs, self.term()?).not())
        } else {
            Err(self.unexpected("'=' or '!='"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(s: &str, p: &str, o: &str) -> TriplePattern {
        let term = |x: &str| {
            if let Some(v) = x.strip_prefix('?') {
                TermPattern::var(v)
            } else {
                TermPattern::iri(x)
            }
        };
        TriplePattern::new(term(s), term(p), term(o))
    }

    fn basic(ts: &[TriplePattern]) -> BasicPattern {
        let mut bp = BasicPattern::new();
        ts.iter().cloned().for_each(|t| bp.push_triple(t));
        bp
    }

    #[test]
    fn simple_select() {
        let q = parse_query("SELECT ?x WHERE { ?x <p> <b> }").unwrap();
        assert_eq!(
            q,
            Query::Select {
                vars: vec![Variable::new("x")],
                body: Pattern::Basic(basic(&[tp("?x", "p", "b")])),
            }
        );
    }

    #[test]
    fn select_with_union() {
        let q = parse_query("SELECT ?x WHERE { { GRAPH <g1> { ?x <q> ?y } } UNION { ?x <p> ?y } }").unwrap();
        let mut left = BasicPattern::new();
        left.push_graph(TermPattern::iri("g1"), vec![tp("?x", "q", "?y")]);
        assert_eq!(
            q.body(),
            &Pattern::Basic(left).union(Pattern::Basic(basic(&[tp("?x", "p", "?y")])))
        );
    }

    #[test]
    fn union_after_graph_block_parses_as_union() {
        // a group holding only a GRAPH block can be a UNION operand
        let q = parse_query("SELECT ?x WHERE { { GRAPH <g1> { ?x <q> ?y } } UNION { ?x <p> ?y } . }").unwrap();
        assert!(matches!(q.body(), Pattern::Union(..)));
    }

    #[test]
    fn filter_inside_graph_is_rejected() {
        let err = parse_query("SELECT ?x WHERE { GRAPH <g> { ?x <p> ?y . FILTER(?x = ?y) } }").unwrap_err();
        assert!(err.is_nested_in_graph(), "{err}");
        assert_eq!((err.line(), err.column()), (1, 43));
        for bad in [
            "SELECT ?x WHERE { GRAPH <g> { { ?x <p> ?y } } }",
            "SELECT ?x WHERE { GRAPH <g> { ?x <p> ?y OPTIONAL { ?y <p> ?z } } }",
            "SELECT ?x WHERE { GRAPH <g> { GRAPH <h> { ?x <p> ?y } } }",
        ] {
            assert!(parse_query(bad).unwrap_err().is_nested_in_graph(), "{bad}");
        }
    }

    #[test]
    fn create_graph() {
        assert_eq!(parse_update("CREATE GRAPH <g1>").unwrap(), Update::Create(GraphName::iri("g1")));
    }

    #[test]
    fn insert_where() {
        let u = parse_update("INSERT { GRAPH <g1> { ?x <p2> ?y } } WHERE { ?x <p> ?y }").unwrap();
        let mut template = BasicPattern::new();
        template.push_graph(TermPattern::iri("g1"), vec![tp("?x", "p2", "?y")]);
        assert_eq!(
            u,
            Update::InsertWhere {
                template,
                pattern: Pattern::Basic(basic(&[tp("?x", "p", "?y")])),
            }
        );
    }

    #[test]
    fn insert_data_desugars() {
        let u = parse_update("INSERT DATA { GRAPH <g1> { <a> <p> <b> } }").unwrap();
        let mut template = BasicPattern::new();
        template.push_graph(TermPattern::iri("g1"), vec![tp("a", "p", "b")]);
        assert_eq!(
            u,
            Update::InsertWhere {
                template,
                pattern: Pattern::empty(),
            }
        );
        assert!(parse_update("INSERT DATA { ?x <p> <b> }").is_err());
    }

    #[test]
    fn delete_where_shorthand() {
        let u = parse_update("DELETE WHERE { ?x <p> ?y }").unwrap();
        let bp = basic(&[tp("?x", "p", "?y")]);
        assert_eq!(
            u,
            Update::DeleteWhere {
                template: bp.clone(),
                pattern: Pattern::Basic(bp),
            }
        );
    }

    #[test]
    fn graph_management_forms() {
        let g = |s: &str| GraphName::iri(s);
        let cases = [
            ("LOAD <h> INTO GRAPH <g>", Update::Load { source: g("h"), target: g("g") }),
            ("LOAD <h>", Update::Load { source: g("h"), target: GraphName::Default }),
            ("CLEAR DEFAULT", Update::Clear(GraphName::Default)),
            ("clear graph <g>", Update::Clear(g("g"))),
            ("DROP GRAPH <g>", Update::Drop(g("g"))),
            ("COPY <a> TO GRAPH <b>", Update::Copy { source: g("a"), target: g("b") }),
            ("MOVE DEFAULT TO <b>", Update::Move { source: GraphName::Default, target: g("b") }),
            ("ADD GRAPH <a> TO DEFAULT", Update::Add { source: g("a"), target: GraphName::Default }),
        ];
        for (text, expected) in cases {
            assert_eq!(parse_update(text).unwrap(), expected, "{text}");
        }
    }

    #[test]
    fn prefixes_expand() {
        let q = parse_query("PREFIX ex: <http://ex.org/>\nSELECT ?x WHERE { ?x a ex:Thing }").unwrap();
        assert_eq!(
            q.body(),
            &Pattern::Basic(basic(&[tp(
                "?x",
                "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
                "http://ex.org/Thing"
            )]))
        );
        let err = parse_query("SELECT ?x WHERE { ?x a nope:Thing }").unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn skolemization_is_per_statement() {
        let text = "INSERT DATA { _:b <p> _:b . _:c <p> <x> }";
        let first = parse_update(text).unwrap();
        let second = parse_update(text).unwrap();
        let Update::InsertWhere { template, .. } = &first else { panic!() };
        let Block::Default(ts) = &template.blocks()[0] else { panic!() };
        assert_eq!(ts[0].subject, ts[0].object);
        assert_ne!(ts[0].subject, ts[1].subject);
        let TermPattern::Atom(Atom::Iri(iri)) = &ts[0].subject else { panic!() };
        assert!(iri.starts_with(SKOLEM_PREFIX));
        assert_ne!(first, second);

        let mut seeded = Skolemizer::new();
        let a = parse_update_with(text, &mut seeded).unwrap();
        let mut replay = Skolemizer::with_bindings(seeded.into_bindings());
        assert_eq!(parse_update_with(text, &mut replay).unwrap(), a);
    }

    #[test]
    fn literals_and_filters() {
        let q = parse_query(r#"SELECT ?x WHERE { ?x <p> "a\"b"@en-GB , "1"^^<dt> , 42 . FILTER (!BOUND(?y) || ?x != <a> && ?x = "z") }"#).unwrap();
        let Pattern::Filter(body, cond) = q.body() else { panic!("{q:?}") };
        let Pattern::Basic(bp) = &**body else { panic!() };
        let Block::Default(ts) = &bp.blocks()[0] else { panic!() };
        assert_eq!(ts.len(), 3);
        assert_eq!(
            ts[0].object,
            TermPattern::Atom(Atom::Literal(Literal::with_language("a\"b", "en-GB").unwrap()))
        );
        assert_eq!(ts[2].object, TermPattern::Atom(Atom::Literal(Literal::typed("42", XSD_INTEGER))));
        let x = TermPattern::var("x");
        let expected = Condition::Bound(Variable::new("y")).not().or(Condition::Equal(x.clone(), TermPattern::iri("a"))
            .not()
            .and(Condition::Equal(x, TermPattern::Atom(Atom::literal("z")))));
        assert_eq!(cond, &expected);
    }

    #[test]
    fn group_translation() {
        let q = parse_query("SELECT ?x WHERE { ?x <p> ?y OPTIONAL { ?y <q> ?z } ?x <r> ?w FILTER BOUND(?z) }").unwrap();
        let expected = Pattern::Basic(basic(&[tp("?x", "p", "?y")]))
            .optional(Pattern::Basic(basic(&[tp("?y", "q", "?z")])))
            .join(Pattern::Basic(basic(&[tp("?x", "r", "?w")])))
            .filter(Condition::Bound(Variable::new("z")));
        assert_eq!(q.body(), &expected);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_query("SELECT ?x\nWHERE { ?x <p> }").unwrap_err();
        assert_eq!(err.line(), 2);
        assert!(parse_query("SELECT ?x ?x WHERE { ?x <p> ?y }").is_err());
        assert!(parse_query("ASK { ?x <p> ?y }").is_err());
        assert!(parse_update("INSERT { ?x <p> ?y }").is_err());
        assert!(parse_update("CREATE <g>").is_err());
        assert!(parse_query("SELECT ?x WHERE { ?x <p> ?y } LIMIT 1").is_err());
    }

    #[test]
    fn select_star_projects_pattern_vars() {
        let q = parse_query("SELECT * { ?b <p> ?a }").unwrap();
        let Query::Select { vars, .. } = q else { panic!() };
        assert_eq!(vars, vec![Variable::new("a"), Variable::new("b")]);
    }
}
