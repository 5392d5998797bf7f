//! Abstract syntax of the query and update language.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{Atom, GraphName};

/// A query variable, written `?name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    /// Panics if `name` is not `[A-Za-z_][A-Za-z0-9_]*`.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(is_variable_name(&name), "invalid variable name {name:?}");
        Variable(name)
    }

    pub fn try_new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        is_variable_name(&name).then_some(Variable(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Atom(Atom),
    Var(Variable),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Var(Variable::new(name))
    }

    pub fn iri(iri: &str) -> Self {
        TermPattern::Atom(Atom::iri(iri))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Atom(_) => None,
        }
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Atom(a) => write!(f, "{a}"),
            TermPattern::Var(v) => write!(f, "{v}"),
        }
    }
}

impl From<Atom> for TermPattern {
    fn from(a: Atom) -> Self {
        TermPattern::Atom(a)
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Var(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: impl Into<TermPattern>, predicate: impl Into<TermPattern>, object: impl Into<TermPattern>) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn terms(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

/// One block of a basic pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Block {
    /// Triples matched against the default graph.
    Default(Vec<TriplePattern>),
    /// `GRAPH name { … }`. Only triple patterns may appear inside.
    Graph {
        name: TermPattern,
        triples: Vec<TriplePattern>,
    },
}

/// A basic graph (or dataset) pattern: a sequence of blocks.
///
/// Kept in normal form: no empty default block and no two adjacent default
/// blocks. Adjacent default blocks mean the same thing as their
/// concatenation, so the normal form loses nothing and makes printing
/// round-trip exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BasicPattern {
    blocks: Vec<Block>,
}

impl BasicPattern {
    pub fn new() -> Self {
        BasicPattern::default()
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Self {
        let mut bp = BasicPattern::new();
        for block in blocks {
            match block {
                Block::Default(ts) => ts.into_iter().for_each(|t| bp.push_triple(t)),
                Block::Graph { name, triples } => bp.push_graph(name, triples),
            }
        }
        bp
    }

    /// Appends a triple to the default graph part.
    pub fn push_triple(&mut self, triple: TriplePattern) {
        match self.blocks.last_mut() {
            Some(Block::Default(ts)) => ts.push(triple),
            _ => self.blocks.push(Block::Default(vec![triple])),
        }
    }

    pub fn push_graph(&mut self, name: TermPattern, triples: Vec<TriplePattern>) {
        self.blocks.push(Block::Graph { name, triples });
    }

    /// `C C'`.
    pub fn concat(mut self, other: BasicPattern) -> Self {
        for block in other.blocks {
            match block {
                Block::Default(ts) => ts.into_iter().for_each(|t| self.push_triple(t)),
                g => self.blocks.push(g),
            }
        }
        self
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        for block in &self.blocks {
            let triples = match block {
                Block::Default(ts) => ts,
                Block::Graph { name, triples } => {
                    if let TermPattern::Var(v) = name {
                        out.insert(v.clone());
                    }
                    triples
                }
            };
            for t in triples {
                for term in t.terms() {
                    if let TermPattern::Var(v) = term {
                        out.insert(v.clone());
                    }
                }
            }
        }
    }

    /// Every atom mentioned by the pattern, graph names included.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for block in &self.blocks {
            let triples = match block {
                Block::Default(ts) => ts,
                Block::Graph { name, triples } => {
                    if let TermPattern::Atom(a) = name {
                        out.insert(a.clone());
                    }
                    triples
                }
            };
            for t in triples {
                for term in t.terms() {
                    if let TermPattern::Atom(a) = term {
                        out.insert(a.clone());
                    }
                }
            }
        }
        out
    }
}

/// FILTER condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Bound(Variable),
    Equal(TermPattern, TermPattern),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn and(self, other: Condition) -> Condition {
        Condition::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Condition) -> Condition {
        Condition::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Condition {
        Condition::Not(Box::new(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Basic(BasicPattern),
    Join(Box<Pattern>, Box<Pattern>),
    Union(Box<Pattern>, Box<Pattern>),
    Optional(Box<Pattern>, Box<Pattern>),
    Filter(Box<Pattern>, Condition),
}

impl Pattern {
    /// The empty basic pattern; matches once with the empty valuation.
    pub fn empty() -> Self {
        Pattern::Basic(BasicPattern::new())
    }

    pub fn join(self, other: Pattern) -> Pattern {
        Pattern::Join(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Pattern) -> Pattern {
        Pattern::Union(Box::new(self), Box::new(other))
    }

    pub fn optional(self, other: Pattern) -> Pattern {
        Pattern::Optional(Box::new(self), Box::new(other))
    }

    pub fn filter(self, condition: Condition) -> Pattern {
        Pattern::Filter(Box::new(self), condition)
    }

    /// Variables that can be bound by the pattern. Filter conditions do not
    /// bind.
    pub fn vars(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            Pattern::Basic(bp) => bp.collect_vars(out),
            Pattern::Join(a, b) | Pattern::Union(a, b) | Pattern::Optional(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pattern::Filter(p, _) => p.collect_vars(out),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Pattern::Basic(bp) => out.extend(bp.atoms()),
            Pattern::Join(a, b) | Pattern::Union(a, b) | Pattern::Optional(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Pattern::Filter(p, c) => {
                p.collect_atoms(out);
                condition_atoms(c, out);
            }
        }
    }
}

fn condition_atoms(c: &Condition, out: &mut BTreeSet<Atom>) {
    match c {
        Condition::Bound(_) => {}
        Condition::Equal(a, b) => {
            for t in [a, b] {
                if let TermPattern::Atom(a) = t {
                    out.insert(a.clone());
                }
            }
        }
        Condition::And(a, b) | Condition::Or(a, b) => {
            condition_atoms(a, out);
            condition_atoms(b, out);
        }
        Condition::Not(a) => condition_atoms(a, out),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Select { vars: Vec<Variable>, body: Pattern },
    Construct { template: BasicPattern, body: Pattern },
}

impl Query {
    pub fn body(&self) -> &Pattern {
        match self {
            Query::Select { body, .. } | Query::Construct { body, .. } => body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Update {
    InsertWhere { template: BasicPattern, pattern: Pattern },
    DeleteWhere { template: BasicPattern, pattern: Pattern },
    DeleteInsertWhere { delete: BasicPattern, insert: BasicPattern, pattern: Pattern },
    Load { source: GraphName, target: GraphName },
    Clear(GraphName),
    Create(GraphName),
    Drop(GraphName),
    Copy { source: GraphName, target: GraphName },
    Move { source: GraphName, target: GraphName },
    Add { source: GraphName, target: GraphName },
}

impl Update {
    /// Lower-case verb, as used for provenance type labels.
    pub fn verb(&self) -> &'static str {
        match self {
            Update::InsertWhere { .. } => "insert",
            Update::DeleteWhere { .. } => "delete",
            Update::DeleteInsertWhere { .. } => "delete-insert",
            Update::Load { .. } => "load",
            Update::Clear(_) => "clear",
            Update::Create(_) => "create",
            Update::Drop(_) => "drop",
            Update::Copy { .. } => "copy",
            Update::Move { .. } => "move",
            Update::Add { .. } => "add",
        }
    }

    /// Every atom the update mentions.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let graph_atoms = |names: &[&GraphName]| -> BTreeSet<Atom> {
            names.iter().filter_map(|n| n.as_atom().cloned()).collect()
        };
        match self {
            Update::InsertWhere { template, pattern } | Update::DeleteWhere { template, pattern } => {
                let mut out = template.atoms();
                out.extend(pattern.atoms());
                out
            }
            Update::DeleteInsertWhere { delete, insert, pattern } => {
                let mut out = delete.atoms();
                out.extend(insert.atoms());
                out.extend(pattern.atoms());
                out
            }
            Update::Clear(g) | Update::Create(g) | Update::Drop(g) => graph_atoms(&[g]),
            Update::Load { source, target }
            | Update::Copy { source, target }
            | Update::Move { source, target }
            | Update::Add { source, target } => graph_atoms(&[source, target]),
        }
    }
}
