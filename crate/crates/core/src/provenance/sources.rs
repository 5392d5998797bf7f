//! Graphs consulted by a query.

use std::collections::BTreeSet;

use crate::model::{Dataset, GraphName};
use crate::query::{eval_basic, Valuation};
use crate::syntax::ast::{BasicPattern, Block, Pattern, Query};

/// Graph names occurring in `c` under `m`. Requires `vars(c) ⊆ dom(m)`.
pub fn names(m: &Valuation, c: &BasicPattern) -> BTreeSet<GraphName> {
    c.blocks()
        .iter()
        .map(|b| match b {
            Block::Default(_) => GraphName::Default,
            Block::Graph { name, .. } => {
                GraphName::Named(m.apply(name).expect("graph name variable is bound by the valuation"))
            }
        })
        .collect()
}

pub fn pattern_sources(p: &Pattern, d: &Dataset) -> BTreeSet<GraphName> {
    match p {
        Pattern::Basic(c) => eval_basic(c, d).iter().flat_map(|m| names(m, c)).collect(),
        Pattern::Join(a, b) | Pattern::Union(a, b) | Pattern::Optional(a, b) => {
            let mut out = pattern_sources(a, d);
            out.extend(pattern_sources(b, d));
            out
        }
        Pattern::Filter(a, _) => pattern_sources(a, d),
    }
}

pub fn query_sources(q: &Query, d: &Dataset) -> BTreeSet<GraphName> {
    pattern_sources(q.body(), d)
}
