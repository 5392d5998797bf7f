//! Set-based evaluation of patterns and queries over a dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Atom, Dataset, Graph, GraphName, Triple};
use crate::syntax::ast::*;

/// A partial map from variables to atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(BTreeMap<Variable, Atom>);

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn get(&self, v: &Variable) -> Option<&Atom> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Variable, a: Atom) -> Option<Atom> {
        self.0.insert(v, a)
    }

    pub fn contains(&self, v: &Variable) -> bool {
        self.0.contains_key(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> + '_ {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Atom)> + '_ {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `μ(A)`: atoms map to themselves, variables to their binding.
    pub fn apply(&self, term: &TermPattern) -> Option<Atom> {
        match term {
            TermPattern::Atom(a) => Some(a.clone()),
            TermPattern::Var(v) => self.0.get(v).cloned(),
        }
    }

    /// `μ|_X`.
    pub fn project(&self, vars: &[Variable]) -> Valuation {
        Valuation(
            vars.iter()
                .filter_map(|v| self.0.get(v).map(|a| (v.clone(), a.clone())))
                .collect(),
        )
    }
}

impl<const N: usize> From<[(Variable, Atom); N]> for Valuation {
    fn from(pairs: [(Variable, Atom); N]) -> Self {
        Valuation(pairs.into_iter().collect())
    }
}

impl FromIterator<(Variable, Atom)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (Variable, Atom)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}

pub type ValuationSet = BTreeSet<Valuation>;

/// Agree on every shared variable.
pub fn compatible(m1: &Valuation, m2: &Valuation) -> bool {
    let (small, large) = if m1.len() <= m2.len() { (m1, m2) } else { (m2, m1) };
    small.iter().all(|(v, a)| large.get(v).is_none_or(|b| a == b))
}

/// `μ1 ∪ μ2`. The valuations must be compatible.
pub fn merge(m1: &Valuation, m2: &Valuation) -> Valuation {
    assert!(compatible(m1, m2), "merge of incompatible valuations");
    let mut out = m1.clone();
    for (v, a) in m2.iter() {
        out.0.insert(v.clone(), a.clone());
    }
    out
}

pub fn vjoin(o1: &ValuationSet, o2: &ValuationSet) -> ValuationSet {
    let mut out = ValuationSet::new();
    for m1 in o1 {
        for m2 in o2 {
            if compatible(m1, m2) {
                out.insert(merge(m1, m2));
            }
        }
    }
    out
}

pub fn vunion(o1: &ValuationSet, o2: &ValuationSet) -> ValuationSet {
    o1.union(o2).cloned().collect()
}

/// Valuations of `o1` incompatible with every valuation of `o2`.
pub fn vdiff(o1: &ValuationSet, o2: &ValuationSet) -> ValuationSet {
    o1.iter()
        .filter(|m1| o2.iter().all(|m2| !compatible(m1, m2)))
        .cloned()
        .collect()
}

pub fn vleftjoin(o1: &ValuationSet, o2: &ValuationSet) -> ValuationSet {
    let mut out = vjoin(o1, o2);
    out.extend(vdiff(o1, o2));
    out
}

/// Three-valued truth, ordered `False < Error < True`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truth {
    False,
    Error,
    True,
}

impl Truth {
    pub fn and(self, other: Truth) -> Truth {
        self.min(other)
    }

    pub fn or(self, other: Truth) -> Truth {
        self.max(other)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Error => Truth::Error,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::False => "false",
            Truth::Error => "error",
            Truth::True => "true",
        })
    }
}

pub fn eval_condition(r: &Condition, m: &Valuation) -> Truth {
    match r {
        Condition::Bound(v) => {
            if m.contains(v) {
                Truth::True
            } else {
                Truth::False
            }
        }
        // atoms are always in scope; only unbound variables make this an error
        Condition::Equal(a, b) => match (m.apply(a), m.apply(b)) {
            (Some(x), Some(y)) if x == y => Truth::True,
            (Some(_), Some(_)) => Truth::False,
            _ => Truth::Error,
        },
        Condition::And(a, b) => eval_condition(a, m).and(eval_condition(b, m)),
        Condition::Or(a, b) => eval_condition(a, m).or(eval_condition(b, m)),
        Condition::Not(a) => eval_condition(a, m).not(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("variable {0} is unbound")]
pub struct UnboundVariable(pub Variable);

fn ground(m: &Valuation, term: &TermPattern) -> Result<Atom, UnboundVariable> {
    match term {
        TermPattern::Atom(a) => Ok(a.clone()),
        TermPattern::Var(v) => m.get(v).cloned().ok_or_else(|| UnboundVariable(v.clone())),
    }
}

fn ground_triple(m: &Valuation, t: &TriplePattern) -> Result<Triple, UnboundVariable> {
    Ok(Triple::new(ground(m, &t.subject)?, ground(m, &t.predicate)?, ground(m, &t.object)?))
}

/// `μ(C)`: default blocks become default-graph triples, graph blocks become
/// named-graph entries keyed by `μ(A)`.
pub fn instantiate(m: &Valuation, c: &BasicPattern) -> Result<Dataset, UnboundVariable> {
    let mut out = Dataset::new();
    for block in c.blocks() {
        match block {
            Block::Default(ts) => {
                for t in ts {
                    out.default_graph_mut().insert(ground_triple(m, t)?);
                }
            }
            Block::Graph { name, triples } => {
                let name = GraphName::Named(ground(m, name)?);
                let mut g = Graph::new();
                for t in triples {
                    g.insert(ground_triple(m, t)?);
                }
                let mut d = Dataset::new();
                d.set_graph(&name, g);
                out.union_in_place(&d);
            }
        }
    }
    Ok(out)
}

/// Binds `term` against `atom`, extending `m`. Returns `false` on conflict.
fn unify(term: &TermPattern, atom: &Atom, m: &mut Valuation, bound: &mut Vec<Variable>) -> bool {
    match term {
        TermPattern::Atom(a) => a == atom,
        TermPattern::Var(v) => match m.get(v) {
            Some(b) => b == atom,
            None => {
                m.insert(v.clone(), atom.clone());
                bound.push(v.clone());
                true
            }
        },
    }
}

fn undo(m: &mut Valuation, bound: Vec<Variable>) {
    for v in bound {
        m.0.remove(&v);
    }
}

/// Every `μ` with `dom(μ) = vars(C)` and `μ(C) ⊆ D`.
pub fn eval_basic(c: &BasicPattern, d: &Dataset) -> ValuationSet {
    let mut steps = Vec::new();
    for block in c.blocks() {
        match block {
            Block::Default(ts) => steps.extend(ts.iter().map(Step::Default)),
            // an empty GRAPH block still requires its name to be defined
            Block::Graph { name, triples } if triples.is_empty() => steps.push(Step::Named(name, None)),
            Block::Graph { name, triples } => steps.extend(triples.iter().map(|t| Step::Named(name, Some(t)))),
        }
    }
    let mut out = ValuationSet::new();
    match_steps(&steps, d, &mut Valuation::new(), &mut out);
    out
}

enum Step<'a> {
    Default(&'a TriplePattern),
    Named(&'a TermPattern, Option<&'a TriplePattern>),
}

fn match_steps(steps: &[Step<'_>], d: &Dataset, m: &mut Valuation, out: &mut ValuationSet) {
    let Some((step, rest)) = steps.split_first() else {
        out.insert(m.clone());
        return;
    };
    match step {
        Step::Default(t) => match_triple(d.default_graph(), t, rest, d, m, out),
        Step::Named(name, t) => {
            let graphs: Vec<(&Atom, &Graph)> = match m.apply(name) {
                Some(a) => d.named_entry(&a).into_iter().collect(),
                None => d.named_graphs().collect(),
            };
            for (gname, g) in graphs {
                let mut bound = Vec::new();
                if unify(name, gname, m, &mut bound) {
                    match t {
                        Some(t) => match_triple(g, t, rest, d, m, out),
                        None => match_steps(rest, d, m, out),
                    }
                }
                undo(m, bound);
            }
        }
    }
}

fn match_triple(g: &Graph, t: &TriplePattern, rest: &[Step<'_>], d: &Dataset, m: &mut Valuation, out: &mut ValuationSet) {
    // a bound subject narrows the scan to one ordered range
    let subject = m.apply(&t.subject);
    let candidates: Vec<&Triple> = match &subject {
        Some(s) => g.with_subject(s).collect(),
        None => g.iter().collect(),
    };
    for triple in candidates {
        let mut bound = Vec::new();
        if unify(&t.subject, &triple.subject, m, &mut bound)
            && unify(&t.predicate, &triple.predicate, m, &mut bound)
            && unify(&t.object, &triple.object, m, &mut bound)
        {
            match_steps(rest, d, m, out);
        }
        undo(m, bound);
    }
}

pub fn eval_pattern(p: &Pattern, d: &Dataset) -> ValuationSet {
    match p {
        Pattern::Basic(c) => eval_basic(c, d),
        Pattern::Join(a, b) => vjoin(&eval_pattern(a, d), &eval_pattern(b, d)),
        Pattern::Union(a, b) => vunion(&eval_pattern(a, d), &eval_pattern(b, d)),
        Pattern::Optional(a, b) => vleftjoin(&eval_pattern(a, d), &eval_pattern(b, d)),
        Pattern::Filter(a, r) => eval_pattern(a, d)
            .into_iter()
            .filter(|m| eval_condition(r, m) == Truth::True)
            .collect(),
    }
}

pub fn eval_select(vars: &[Variable], body: &Pattern, d: &Dataset) -> ValuationSet {
    eval_pattern(body, d).iter().map(|m| m.project(vars)).collect()
}

/// `⋃{μ(C) | μ ∈ [[P]]_D}`, skipping valuations that leave a template
/// variable unbound.
pub fn eval_construct(template: &BasicPattern, body: &Pattern, d: &Dataset) -> Dataset {
    let mut out = Dataset::new();
    for m in eval_pattern(body, d) {
        if let Ok(inst) = instantiate(&m, template) {
            out.union_in_place(&inst);
        }
    }
    out
}

/// Result of evaluating a [`Query`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Solutions { vars: Vec<Variable>, rows: ValuationSet },
    Graph(Dataset),
}

pub fn eval_query(q: &Query, d: &Dataset) -> QueryResult {
    match q {
        Query::Select { vars, body } => QueryResult::Solutions {
            vars: vars.clone(),
            rows: eval_select(vars, body, d),
        },
        Query::Construct { template, body } => QueryResult::Graph(eval_construct(template, body, d)),
    }
}

/// Tab-separated table: a header of `?var` names, then one row per
/// solution with unbound cells left empty. Rows are in sorted order.
pub fn format_solutions(vars: &[Variable], rows: &ValuationSet) -> String {
    let mut out = vars.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t");
    out.push('\n');
    let mut lines: Vec<String> = rows
        .iter()
        .map(|m| {
            vars.iter()
                .map(|v| m.get(v).map(|a| a.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\t")
        })
        .collect();
    lines.sort();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
