//! Minting and parsing of version, update, data-graph and meta IRIs.
//!
//! For a tracked graph `g` and index `i` these are `g#_v<i>`, `g#_u<i>`,
//! `g#_d<i>` and `g#_m<i>`. The default graph is tracked under
//! [`DEFAULT_GRAPH`](super::vocab::DEFAULT_GRAPH).

use crate::model::{Atom, GraphName};

use super::vocab::{DEFAULT_GRAPH, PROV_GRAPH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdKind {
    Version,
    Update,
    Data,
    Meta,
}

impl IdKind {
    fn tag(self) -> char {
        match self {
            IdKind::Version => 'v',
            IdKind::Update => 'u',
            IdKind::Data => 'd',
            IdKind::Meta => 'm',
        }
    }

    fn from_tag(c: char) -> Option<IdKind> {
        match c {
            'v' => Some(IdKind::Version),
            'u' => Some(IdKind::Update),
            'd' => Some(IdKind::Data),
            'm' => Some(IdKind::Meta),
            _ => None,
        }
    }
}

/// IRI under which `g` is tracked. `None` for graphs named by literals.
pub fn tracked_iri(g: &GraphName) -> Option<&str> {
    match g {
        GraphName::Default => Some(DEFAULT_GRAPH),
        GraphName::Named(a) => a.as_iri(),
    }
}

/// Inverse of [`tracked_iri`].
pub fn graph_name(iri: &str) -> GraphName {
    if iri == DEFAULT_GRAPH {
        GraphName::Default
    } else {
        GraphName::iri(iri)
    }
}

pub fn mint(graph_iri: &str, kind: IdKind, index: usize) -> String {
    format!("{graph_iri}#_{}{index}", kind.tag())
}

pub fn mint_atom(graph_iri: &str, kind: IdKind, index: usize) -> Atom {
    Atom::iri(mint(graph_iri, kind, index))
}

/// Splits a minted IRI into its graph IRI, kind and index.
pub fn parse_minted(iri: &str) -> Option<(&str, IdKind, usize)> {
    let (base, rest) = iri.rsplit_once("#_")?;
    let mut chars = rest.chars();
    let kind = IdKind::from_tag(chars.next()?)?;
    let digits = chars.as_str();
    if base.is_empty() || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // reject leading zeros so every index has exactly one spelling
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    Some((base, kind, digits.parse().ok()?))
}

pub fn parse_minted_atom(a: &Atom) -> Option<(&str, IdKind, usize)> {
    parse_minted(a.as_iri()?)
}

/// True for names users may not read from or write to as graphs.
pub fn is_reserved(iri: &str) -> bool {
    iri == PROV_GRAPH || iri == DEFAULT_GRAPH || looks_minted(iri)
}

fn looks_minted(iri: &str) -> bool {
    let Some((_, rest)) = iri.rsplit_once("#_") else {
        return false;
    };
    let mut chars = rest.chars();
    matches!(chars.next(), Some('v' | 'u' | 'd' | 'm'))
        && !chars.as_str().is_empty()
        && chars.as_str().bytes().all(|b| b.is_ascii_digit())
}
