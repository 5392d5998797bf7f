//! Slow reference implementations. They use the data model and AST types
//! only and never call the engines under test.

use std::collections::{BTreeMap, BTreeSet};

use updprov::model::{Atom, Dataset, Graph, GraphName, Triple};
use updprov::syntax::ast::{BasicPattern, Block, Condition, Pattern, TermPattern, Update, Variable};

pub type NaiveValuation = BTreeMap<Variable, Atom>;
pub type NaiveSet = BTreeSet<NaiveValuation>;

/// Upper bound on the assignments enumerated for one basic pattern.
const ENUMERATION_LIMIT: usize = 2_000_000;

fn dataset_atoms(d: &Dataset) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    let add_graph = |g: &Graph, out: &mut BTreeSet<Atom>| {
        for t in g.iter() {
            out.insert(t.subject.clone());
            out.insert(t.predicate.clone());
            out.insert(t.object.clone());
        }
    };
    add_graph(d.default_graph(), &mut out);
    for (name, g) in d.named_graphs() {
        out.insert(name.clone());
        add_graph(g, &mut out);
    }
    out
}

fn pattern_atoms(p: &Pattern, out: &mut BTreeSet<Atom>) {
    match p {
        Pattern::Basic(c) => basic_atoms(c, out),
        Pattern::Join(a, b) | Pattern::Union(a, b) | Pattern::Optional(a, b) => {
            pattern_atoms(a, out);
            pattern_atoms(b, out);
        }
        Pattern::Filter(a, _) => pattern_atoms(a, out),
    }
}

fn basic_atoms(c: &BasicPattern, out: &mut BTreeSet<Atom>) {
    let mut term = |t: &TermPattern| {
        if let TermPattern::Atom(a) = t {
            out.insert(a.clone());
        }
    };
    for b in c.blocks() {
        match b {
            Block::Default(ts) => ts.iter().for_each(|t| {
                term(&t.subject);
                term(&t.predicate);
                term(&t.object);
            }),
            Block::Graph { name, triples } => {
                term(name);
                triples.iter().for_each(|t| {
                    term(&t.subject);
                    term(&t.predicate);
                    term(&t.object);
                });
            }
        }
    }
}

fn basic_vars(c: &BasicPattern) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    let mut term = |t: &TermPattern| {
        if let TermPattern::Var(v) = t {
            out.insert(v.clone());
        }
    };
    for b in c.blocks() {
        let ts = match b {
            Block::Default(ts) => ts,
            Block::Graph { name, triples } => {
                term(name);
                triples
            }
        };
        for t in ts {
            term(&t.subject);
            term(&t.predicate);
            term(&t.object);
        }
    }
    out
}

fn subst(m: &NaiveValuation, t: &TermPattern) -> Option<Atom> {
    match t {
        TermPattern::Atom(a) => Some(a.clone()),
        TermPattern::Var(v) => m.get(v).cloned(),
    }
}

/// `μ(C)` as a dataset, or `None` if a variable is unbound.
pub fn naive_instantiate(m: &NaiveValuation, c: &BasicPattern) -> Option<Dataset> {
    let mut default = Graph::new();
    let mut named: BTreeMap<Atom, Graph> = BTreeMap::new();
    for b in c.blocks() {
        let (graph, ts) = match b {
            Block::Default(ts) => (&mut default, ts),
            Block::Graph { name, triples } => (named.entry(subst(m, name)?).or_default(), triples),
        };
        for t in ts {
            graph.insert(Triple::new(subst(m, &t.subject)?, subst(m, &t.predicate)?, subst(m, &t.object)?));
        }
    }
    Some(Dataset::from_parts(default, named))
}

fn contained(small: &Dataset, big: &Dataset) -> bool {
    small.default_graph().iter().all(|t| big.default_graph().contains(t))
        && small.named_graphs().all(|(n, g)| match big.named_graph(n) {
            Some(bg) => g.iter().all(|t| bg.contains(t)),
            None => false,
        })
}

/// All `μ` with `dom(μ) = vars(C)` and `μ(C) ⊆ D`, by trying every
/// assignment of the candidate atoms to the variables.
fn naive_basic(c: &BasicPattern, universe: &[Atom], d: &Dataset) -> NaiveSet {
    let vars: Vec<Variable> = basic_vars(c).into_iter().collect();
    let total = universe.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
    assert!(total <= ENUMERATION_LIMIT, "oracle size guard: {total} assignments");
    let mut out = NaiveSet::new();
    let mut counters = vec![0usize; vars.len()];
    if !vars.is_empty() && universe.is_empty() {
        return out;
    }
    loop {
        let m: NaiveValuation = vars.iter().cloned().zip(counters.iter().map(|&i| universe[i].clone())).collect();
        if let Some(inst) = naive_instantiate(&m, c) {
            if contained(&inst, d) {
                out.insert(m);
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == counters.len() {
                return out;
            }
            counters[pos] += 1;
            if counters[pos] < universe.len() {
                break;
            }
            counters[pos] = 0;
            pos += 1;
        }
    }
}

fn naive_compatible(a: &NaiveValuation, b: &NaiveValuation) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

fn naive_join(l: &NaiveSet, r: &NaiveSet) -> NaiveSet {
    let mut out = NaiveSet::new();
    for a in l {
        for b in r {
            if naive_compatible(a, b) {
                let mut m = a.clone();
                m.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.insert(m);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum T3 {
    F,
    E,
    T,
}

pub fn t3_and(a: T3, b: T3) -> T3 {
    use T3::*;
    match (a, b) {
        (F, _) | (_, F) => F,
        (E, _) | (_, E) => E,
        (T, T) => T,
    }
}

pub fn t3_or(a: T3, b: T3) -> T3 {
    use T3::*;
    match (a, b) {
        (T, _) | (_, T) => T,
        (E, _) | (_, E) => E,
        (F, F) => F,
    }
}

pub fn t3_not(a: T3) -> T3 {
    match a {
        T3::T => T3::F,
        T3::F => T3::T,
        T3::E => T3::E,
    }
}

pub fn naive_condition(r: &Condition, m: &NaiveValuation) -> T3 {
    match r {
        Condition::Bound(v) => {
            if m.contains_key(v) {
                T3::T
            } else {
                T3::F
            }
        }
        Condition::Equal(a, b) => match (subst(m, a), subst(m, b)) {
            (Some(x), Some(y)) => {
                if x == y {
                    T3::T
                } else {
                    T3::F
                }
            }
            _ => T3::E,
        },
        Condition::And(a, b) => t3_and(naive_condition(a, m), naive_condition(b, m)),
        Condition::Or(a, b) => t3_or(naive_condition(a, m), naive_condition(b, m)),
        Condition::Not(a) => t3_not(naive_condition(a, m)),
    }
}

fn eval_in(p: &Pattern, universe: &[Atom], d: &Dataset) -> NaiveSet {
    match p {
        Pattern::Basic(c) => naive_basic(c, universe, d),
        Pattern::Join(a, b) => naive_join(&eval_in(a, universe, d), &eval_in(b, universe, d)),
        Pattern::Union(a, b) => {
            let mut out = eval_in(a, universe, d);
            out.extend(eval_in(b, universe, d));
            out
        }
        Pattern::Optional(a, b) => {
            let l = eval_in(a, universe, d);
            let r = eval_in(b, universe, d);
            let mut out = naive_join(&l, &r);
            for m in &l {
                if r.iter().all(|n| !naive_compatible(m, n)) {
                    out.insert(m.clone());
                }
            }
            out
        }
        Pattern::Filter(a, r) => eval_in(a, universe, d)
            .into_iter()
            .filter(|m| naive_condition(r, m) == T3::T)
            .collect(),
    }
}

/// Pattern evaluation by exhaustive enumeration over `atoms(D) ∪ atoms(P)`.
pub fn naive_eval_pattern(p: &Pattern, d: &Dataset) -> NaiveSet {
    let mut universe = dataset_atoms(d);
    pattern_atoms(p, &mut universe);
    let universe: Vec<Atom> = universe.into_iter().collect();
    eval_in(p, &universe, d)
}

pub fn naive_construct(template: &BasicPattern, p: &Pattern, d: &Dataset) -> Dataset {
    let mut out = Dataset::new();
    for m in naive_eval_pattern(p, d) {
        if let Some(inst) = naive_instantiate(&m, template) {
            out = out.union(&inst);
        }
    }
    out
}

fn get(d: &Dataset, g: &GraphName) -> Result<Graph, String> {
    d.graph(g).cloned().ok_or_else(|| format!("{g} undefined"))
}

/// One update under the reference semantics.
pub fn naive_apply(u: &Update, d: &Dataset) -> Result<Dataset, String> {
    let mut out = d.clone();
    match u {
        Update::InsertWhere { template, pattern } => Ok(d.union(&naive_construct(template, pattern, d))),
        Update::DeleteWhere { template, pattern } => Ok(d.difference(&naive_construct(template, pattern, d))),
        Update::DeleteInsertWhere { delete, insert, pattern } => Ok(d
            .difference(&naive_construct(delete, pattern, d))
            .union(&naive_construct(insert, pattern, d))),
        Update::Load { source, target } | Update::Add { source, target } => {
            let s = get(d, source)?;
            let t = get(d, target)?;
            out.set_graph(target, s.union(&t));
            Ok(out)
        }
        Update::Clear(g) => {
            get(d, g)?;
            out.set_graph(g, Graph::new());
            Ok(out)
        }
        Update::Create(g) => {
            if *g == GraphName::Default || d.graph(g).is_some() {
                return Err(format!("cannot create {g}"));
            }
            out.set_graph(g, Graph::new());
            Ok(out)
        }
        Update::Drop(g) => {
            if *g == GraphName::Default {
                return Err("cannot drop the default graph".into());
            }
            get(d, g)?;
            out.remove_graph(g);
            Ok(out)
        }
        Update::Copy { source, target } => {
            let s = get(d, source)?;
            get(d, target)?;
            out.set_graph(target, s);
            Ok(out)
        }
        Update::Move { source, target } => {
            if *source == GraphName::Default {
                return Err("cannot move the default graph".into());
            }
            let s = get(d, source)?;
            get(d, target)?;
            if source != target {
                out.remove_graph(source);
                out.set_graph(target, s);
            }
            Ok(out)
        }
    }
}

/// The dataset after every prefix of `updates`, starting with the empty
/// dataset. Fails at the first rejected update.
pub fn naive_versioned_apply(updates: &[Update]) -> Result<Vec<Dataset>, (usize, String)> {
    let mut states = vec![Dataset::new()];
    for (i, u) in updates.iter().enumerate() {
        let next = naive_apply(u, states.last().expect("non-empty")).map_err(|e| (i, e))?;
        states.push(next);
    }
    Ok(states)
}
