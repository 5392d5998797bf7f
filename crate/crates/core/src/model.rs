//! Ground RDF data: atoms, triples, graphs and datasets.
//!
//! A [`Dataset`] is a default graph plus a partial map from names to graphs.
//! A name that maps to an empty graph is *defined*; a name absent from the
//! map is *undefined*. The set algebra on datasets keeps the two apart, which
//! is what lets `CREATE`, `CLEAR` and `DROP` have distinct effects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("IRI <{iri}> contains forbidden character {ch:?}")]
    IriCharacter { iri: String, ch: char },
    #[error("invalid language tag {0:?}")]
    LanguageTag(String),
}

/// Literal annotation. A literal carries at most one of a datatype or a
/// language tag, so the two are alternatives rather than two options.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Simple,
    Language(String),
    Typed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Simple,
        }
    }

    pub fn with_language(lexical: impl Into<String>, tag: impl Into<String>) -> Result<Self, ModelError> {
        let tag = tag.into();
        if !is_language_tag(&tag) {
            return Err(ModelError::LanguageTag(tag));
        }
        Ok(Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Language(tag),
        })
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Typed(datatype.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }
}

pub(crate) fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    !first.is_empty()
        && first.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

/// A ground term: an IRI or a literal.
///
/// Equality is structural. `"1"^^xsd:int` and `"01"^^xsd:int` are different
/// atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Iri(String),
    Literal(Literal),
}

impl Atom {
    /// Builds an IRI atom without validation. Use [`Atom::parse_iri`] for
    /// untrusted input.
    pub fn iri(iri: impl Into<String>) -> Self {
        Atom::Iri(iri.into())
    }

    pub fn parse_iri(iri: impl Into<String>) -> Result<Self, ModelError> {
        let iri = iri.into();
        validate_iri(&iri)?;
        Ok(Atom::Iri(iri))
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Atom::Literal(Literal::simple(lexical))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Atom::Iri(iri) => Some(iri),
            Atom::Literal(_) => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Atom::Iri(_))
    }

    /// Smallest atom in the derived order; used as a range-scan bound.
    pub(crate) fn min_value() -> Self {
        Atom::Iri(String::new())
    }
}

pub(crate) fn validate_iri(iri: &str) -> Result<(), ModelError> {
    if iri.is_empty() {
        return Err(ModelError::EmptyIri);
    }
    if let Some(ch) = iri
        .chars()
        .find(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return Err(ModelError::IriCharacter {
            iri: iri.to_string(),
            ch,
        });
    }
    Ok(())
}

impl fmt::Display for Atom {
    /// N-Triples style rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Iri(iri) => write!(f, "<{iri}>"),
            Atom::Literal(lit) => {
                f.write_str("\"")?;
                for c in lit.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match &lit.kind {
                    LiteralKind::Simple => Ok(()),
                    LiteralKind::Language(tag) => write!(f, "@{tag}"),
                    LiteralKind::Typed(dt) => write!(f, "^^<{dt}>"),
                }
            }
        }
    }
}

impl From<Literal> for Atom {
    fn from(lit: Literal) -> Self {
        Atom::Literal(lit)
    }
}

/// A ground triple. Any atom may appear in any position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Atom,
    pub predicate: Atom,
    pub object: Atom,
}

impl Triple {
    pub fn new(subject: Atom, predicate: Atom, object: Atom) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// A set of ground triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// Returns `false` if the triple was already present.
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

    pub fn iter(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    /// Triples whose subject is `subject`, in order.
    pub fn with_subject<'a>(&'a self, subject: &'a Atom) -> impl Iterator<Item = &'a Triple> + 'a {
        let start = Triple::new(subject.clone(), Atom::min_value(), Atom::min_value());
        self.triples
            .range((Bound::Included(start), Bound::Unbounded))
            .take_while(move |t| &t.subject == subject)
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &'a Atom, predicate: &'a Atom) -> impl Iterator<Item = &'a Atom> + 'a {
        self.with_subject(subject)
            .filter(move |t| &t.predicate == predicate)
            .map(|t| &t.object)
    }

    pub fn union(&self, other: &Graph) -> Graph {
        Graph {
            triples: self.triples.union(&other.triples).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &Graph) -> Graph {
        Graph {
            triples: self.triples.difference(&other.triples).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &Graph) -> bool {
        self.triples.is_subset(&other.triples)
    }

    pub fn extend_from(&mut self, other: &Graph) {
        self.triples.extend(other.triples.iter().cloned());
    }

    pub fn remove_all(&mut self, other: &Graph) {
        if other.len() < self.len() {
            for t in &other.triples {
                self.triples.remove(t);
            }
        } else {
            self.triples.retain(|t| !other.triples.contains(t));
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// Name of a graph in a dataset: the distinguished default graph or a named
/// graph. Named graphs are normally IRIs; the algebra also admits literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphName {
    Default,
    Named(Atom),
}

impl GraphName {
    pub fn iri(iri: impl Into<String>) -> Self {
        GraphName::Named(Atom::iri(iri))
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            GraphName::Default => None,
            GraphName::Named(a) => Some(a),
        }
    }
}

impl fmt::Display for GraphName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphName::Default => f.write_str("DEFAULT"),
            GraphName::Named(a) => write!(f, "{a}"),
        }
    }
}

/// Default graph plus a partial map from names to graphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    default: Graph,
    named: BTreeMap<Atom, Graph>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn from_parts(default: Graph, named: BTreeMap<Atom, Graph>) -> Self {
        Dataset { default, named }
    }

    pub fn default_graph(&self) -> &Graph {
        &self.default
    }

    pub fn default_graph_mut(&mut self) -> &mut Graph {
        &mut self.default
    }

    pub fn named_graphs(&self) -> impl Iterator<Item = (&Atom, &Graph)> + '_ {
        self.named.iter()
    }

    pub fn named_graph(&self, name: &Atom) -> Option<&Graph> {
        self.named.get(name)
    }

    pub fn named_entry(&self, name: &Atom) -> Option<(&Atom, &Graph)> {
        self.named.get_key_value(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.named.keys()
    }

    /// The graph for `name`, or `None` if undefined. The default graph is
    /// always defined.
    pub fn graph(&self, name: &GraphName) -> Option<&Graph> {
        match name {
            GraphName::Default => Some(&self.default),
            GraphName::Named(a) => self.named.get(a),
        }
    }

    pub fn graph_mut(&mut self, name: &GraphName) -> Option<&mut Graph> {
        match name {
            GraphName::Default => Some(&mut self.default),
            GraphName::Named(a) => self.named.get_mut(a),
        }
    }

    pub fn is_defined(&self, name: &GraphName) -> bool {
        self.graph(name).is_some()
    }

    /// `D[g := G]`. Defines `g` if needed.
    pub fn set_graph(&mut self, name: &GraphName, graph: Graph) {
        match name {
            GraphName::Default => self.default = graph,
            GraphName::Named(a) => {
                self.named.insert(a.clone(), graph);
            }
        }
    }

    /// `D[g := ⊥]`. Returns the removed graph. The default graph cannot be
    /// undefined; removing it returns `None` and leaves it unchanged.
    pub fn remove_graph(&mut self, name: &GraphName) -> Option<Graph> {
        match name {
            GraphName::Default => None,
            GraphName::Named(a) => self.named.remove(a),
        }
    }

    /// Adds a triple, defining the graph if it was undefined.
    pub fn insert(&mut self, name: &GraphName, triple: Triple) -> bool {
        match name {
            GraphName::Default => self.default.insert(triple),
            GraphName::Named(a) => self.named.entry(a.clone()).or_default().insert(triple),
        }
    }

    pub fn contains(&self, name: &GraphName, triple: &Triple) -> bool {
        self.graph(name).is_some_and(|g| g.contains(triple))
    }

    /// Number of triples across all graphs.
    pub fn len(&self) -> usize {
        self.default.len() + self.named.values().map(Graph::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.default.is_empty() && self.named.is_empty()
    }

    /// Every graph name of the dataset, `Default` first.
    pub fn graph_names(&self) -> impl Iterator<Item = GraphName> + '_ {
        std::iter::once(GraphName::Default).chain(self.named.keys().cloned().map(GraphName::Named))
    }

    /// Pointwise union. A name defined on either side is defined in the
    /// result.
    pub fn union(&self, other: &Dataset) -> Dataset {
        let mut out = self.clone();
        out.union_in_place(other);
        out
    }

    pub fn union_in_place(&mut self, other: &Dataset) {
        self.default.extend_from(&other.default);
        for (name, graph) in &other.named {
            self.named.entry(name.clone()).or_default().extend_from(graph);
        }
    }

    /// Pointwise difference. Names undefined on the left stay undefined;
    /// names defined on the left stay defined even if emptied.
    pub fn difference(&self, other: &Dataset) -> Dataset {
        let mut out = self.clone();
        out.difference_in_place(other);
        out
    }

    pub fn difference_in_place(&mut self, other: &Dataset) {
        self.default.remove_all(&other.default);
        for (name, graph) in self.named.iter_mut() {
            if let Some(sub) = other.named.get(name) {
                graph.remove_all(sub);
            }
        }
    }

    /// `self ⊆ other`, defined as `other = self ∪ other`.
    pub fn is_contained_in(&self, other: &Dataset) -> bool {
        self.default.is_subset(&other.default)
            && self
                .named
                .iter()
                .all(|(name, graph)| other.named.get(name).is_some_and(|o| graph.is_subset(o)))
    }

    /// `D|_S`: every graph not named in `keep` becomes empty. Definedness is
    /// unchanged; the default graph is kept only if `Default ∈ keep`.
    pub fn restrict(&self, keep: &BTreeSet<GraphName>) -> Dataset {
        let default = if keep.contains(&GraphName::Default) {
            self.default.clone()
        } else {
            Graph::new()
        };
        let named = self
            .named
            .iter()
            .map(|(name, graph)| {
                let kept = keep.contains(&GraphName::Named(name.clone()));
                (name.clone(), if kept { graph.clone() } else { Graph::new() })
            })
            .collect();
        Dataset { default, named }
    }
}

pub fn dataset_union(d1: &Dataset, d2: &Dataset) -> Dataset {
    d1.union(d2)
}

pub fn dataset_difference(d1: &Dataset, d2: &Dataset) -> Dataset {
    d1.difference(d2)
}

pub fn dataset_contains(d1: &Dataset, d2: &Dataset) -> bool {
    d1.is_contained_in(d2)
}

pub fn dataset_restrict(d: &Dataset, keep: &BTreeSet<GraphName>) -> Dataset {
    d.restrict(keep)
}
