//! Provenance tracking for updates: version chains, records in the
//! provenance graph, and reconstruction of past graph states.
//!
//! A [`ProvStore`] keeps the user-visible dataset apart from the provenance
//! graph, the materialized version graphs and the data graphs. Its
//! [`to_dataset`](ProvStore::to_dataset) view merges them into one dataset
//! in which each part lives under its own graph name.

mod apply;
pub mod ids;
mod log;
mod reconstruct;
pub mod sources;
mod verify;
pub mod vocab;

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::model::{Atom, Dataset, Graph, GraphName, Literal, Triple};
use crate::store::SnapshotInterval;
use crate::update::UpdateError;

pub use apply::AppliedRecord;
pub use ids::{mint, parse_minted, IdKind};
pub use log::LogEntry;
pub use sources::{names, pattern_sources, query_sources};
pub use verify::{Report, Rule, Violation};
pub use vocab::UpdateType;

use ids::{graph_name, parse_minted_atom, tracked_iri};
use vocab::{CURRENT, PROV_GRAPH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProvError {
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error("provenance target violation: {0}")]
    TargetViolation(String),
    #[error("graph {0} has no current version")]
    NoCurrentVersion(GraphName),
    #[error("version {index} of {graph} does not exist")]
    UnknownVersion { graph: GraphName, index: usize },
    #[error("broken chain at {node}: {reason}")]
    BrokenChain { node: String, reason: String },
    #[error("stored dataset is not a valid provenance store: {0}")]
    Layout(String),
}

impl ProvError {
    pub(crate) fn broken(node: impl ToString, reason: impl Into<String>) -> Self {
        ProvError::BrokenChain {
            node: node.to_string(),
            reason: reason.into(),
        }
    }
}

/// Metadata attached to one update's provenance record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateMeta {
    /// A plain literal for user names, or an IRI.
    pub user: Atom,
    pub time: DateTime<Utc>,
    /// Source text of the update, exactly as parsed.
    pub text: String,
    /// Additional `(predicate, object)` pairs attached to the meta node.
    pub extra: Vec<(Atom, Atom)>,
}

impl UpdateMeta {
    pub fn new(user: impl Into<String>, time: DateTime<Utc>, text: impl Into<String>) -> Self {
        UpdateMeta {
            user: Atom::literal(user),
            time,
            text: text.into(),
            extra: Vec::new(),
        }
    }

    pub fn with_user(mut self, user: Atom) -> Self {
        self.user = user;
        self
    }

    pub fn with_extra(mut self, predicate: Atom, object: Atom) -> Self {
        self.extra.push((predicate, object));
        self
    }

    pub fn time_literal(&self) -> Atom {
        Atom::Literal(Literal::typed(
            self.time.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            vocab::XSD_DATE_TIME,
        ))
    }
}

/// Which versions and data graphs are stored rather than replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Policy {
    pub interval: SnapshotInterval,
    pub materialize_data: bool,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            interval: SnapshotInterval::Every(1),
            materialize_data: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvStore {
    user: Dataset,
    prov: Graph,
    versions: BTreeMap<Atom, Graph>,
    data: BTreeMap<Atom, Graph>,
    next_index: BTreeMap<String, usize>,
    policy: Policy,
}

impl ProvStore {
    pub fn new(policy: Policy) -> Self {
        ProvStore {
            user: Dataset::new(),
            prov: Graph::new(),
            versions: BTreeMap::new(),
            data: BTreeMap::new(),
            next_index: BTreeMap::new(),
            policy,
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// The graphs users read and write.
    pub fn user_dataset(&self) -> &Dataset {
        &self.user
    }

    pub fn prov_graph(&self) -> &Graph {
        &self.prov
    }

    /// Materialized version graphs keyed by version IRI.
    pub fn materialized_versions(&self) -> &BTreeMap<Atom, Graph> {
        &self.versions
    }

    /// Data graphs keyed by data-graph IRI.
    pub fn data_graphs(&self) -> &BTreeMap<Atom, Graph> {
        &self.data
    }

    /// Everything in one dataset: user graphs, the provenance graph, version
    /// graphs and data graphs.
    pub fn to_dataset(&self) -> Dataset {
        let mut named: BTreeMap<Atom, Graph> = self.user.named_graphs().map(|(n, g)| (n.clone(), g.clone())).collect();
        named.insert(Atom::iri(PROV_GRAPH), self.prov.clone());
        named.extend(self.versions.iter().map(|(n, g)| (n.clone(), g.clone())));
        named.extend(self.data.iter().map(|(n, g)| (n.clone(), g.clone())));
        Dataset::from_parts(self.user.default_graph().clone(), named)
    }

    /// Inverse of [`to_dataset`](Self::to_dataset).
    pub fn from_dataset(d: Dataset, policy: Policy) -> Result<Self, ProvError> {
        let mut s = ProvStore::new(policy);
        *s.user.default_graph_mut() = d.default_graph().clone();
        for (name, graph) in d.named_graphs() {
            if name.as_iri() == Some(PROV_GRAPH) {
                s.prov = graph.clone();
                continue;
            }
            match parse_minted_atom(name) {
                Some((_, IdKind::Version, _)) => {
                    s.versions.insert(name.clone(), graph.clone());
                }
                Some((_, IdKind::Data, _)) => {
                    s.data.insert(name.clone(), graph.clone());
                }
                Some(_) => return Err(ProvError::Layout(format!("{name} names a graph but is an update or meta node"))),
                None if name.as_iri().is_some_and(ids::is_reserved) => {
                    return Err(ProvError::Layout(format!("{name} is reserved")));
                }
                None => s.user.set_graph(&GraphName::Named(name.clone()), graph.clone()),
            }
        }
        s.rebuild_counters();
        Ok(s)
    }

    fn rebuild_counters(&mut self) {
        let mut next: BTreeMap<String, usize> = BTreeMap::new();
        let mut see = |a: &Atom| {
            if let Some((base, _, i)) = parse_minted_atom(a) {
                let e = next.entry(base.to_string()).or_insert(0);
                *e = (*e).max(i + 1);
            }
        };
        for t in self.prov.iter() {
            see(&t.subject);
            see(&t.object);
        }
        self.versions.keys().chain(self.data.keys()).for_each(&mut see);
        self.next_index = next;
    }

    /// Index and IRI of the version `upd:current` points at.
    pub fn current_version(&self, g: &GraphName) -> Result<(usize, Atom), ProvError> {
        let giri = tracked_iri(g).ok_or_else(|| ProvError::NoCurrentVersion(g.clone()))?;
        let g_atom = Atom::iri(giri);
        let currents = self.prov_objects(&g_atom, CURRENT);
        let v = match currents.as_slice() {
            [] => return Err(ProvError::NoCurrentVersion(g.clone())),
            [v] => *v,
            _ => return Err(ProvError::broken(giri, "more than one current version")),
        };
        match parse_minted_atom(v) {
            Some((base, IdKind::Version, i)) if base == giri => Ok((i, v.clone())),
            _ => Err(ProvError::broken(giri, format!("current version {v} is not a version of this graph"))),
        }
    }

    /// Names of every graph with a version chain, live or dropped.
    pub fn tracked_graphs(&self) -> Vec<GraphName> {
        let version = vocab::iri(vocab::VERSION);
        let mut out: Vec<GraphName> = self
            .prov
            .iter()
            .filter(|t| t.predicate == version && parse_minted_atom(&t.subject).is_none())
            .filter_map(|t| t.subject.as_iri().map(graph_name))
            .collect();
        out.dedup();
        out
    }

    pub(crate) fn is_live(&self, giri: &str) -> bool {
        self.user.is_defined(&graph_name(giri))
    }

    pub(crate) fn prov_objects<'a>(&'a self, s: &'a Atom, p: &str) -> Vec<&'a Atom> {
        let p = Atom::iri(p);
        self.prov.with_subject(s).filter(|t| t.predicate == p).map(|t| &t.object).collect()
    }

    pub(crate) fn add_prov(&mut self, s: Atom, p: &str, o: Atom) {
        self.prov.insert(Triple::new(s, Atom::iri(p), o));
    }

    #[cfg(test)]
    pub(crate) fn prov_mut(&mut self) -> &mut Graph {
        &mut self.prov
    }
}
