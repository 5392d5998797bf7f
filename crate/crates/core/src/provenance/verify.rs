use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Atom, Graph};
use crate::store::snapshot_decision;

use super::apply::text_reproduces;
use super::ids::{graph_name, mint_atom, parse_minted_atom, IdKind};
use super::reconstruct::Cache;
use super::vocab::{self, UpdateType, CURRENT, DATA, INPUT, META, OUTPUT, PREV_VERSION, SOURCE, TEXT, TIME, TYPE, USER, VERSION};
use super::ProvStore;

/// A structural rule of the provenance graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    SingleCurrent,
    LinearChain,
    VersionPairing,
    UpdateType,
    UpdateMeta,
    InputLink,
    OutputLink,
    SourceLink,
    DataLink,
    DataGraph,
    Snapshot,
    MetaFields,
    Replay,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::SingleCurrent => "single-current",
            Rule::LinearChain => "linear-chain",
            Rule::VersionPairing => "version-pairing",
            Rule::UpdateType => "update-type",
            Rule::UpdateMeta => "update-meta",
            Rule::InputLink => "input-link",
            Rule::OutputLink => "output-link",
            Rule::SourceLink => "source-link",
            Rule::DataLink => "data-link",
            Rule::DataGraph => "data-graph",
            Rule::Snapshot => "snapshot",
            Rule::MetaFields => "meta-fields",
            Rule::Replay => "replay",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub node: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.rule, self.node, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: Rule, node: impl ToString, detail: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            node: node.to_string(),
            detail: detail.into(),
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn version_index(a: &Atom, giri: &str) -> Option<usize> {
    match parse_minted_atom(a) {
        Some((base, IdKind::Version, i)) if base == giri => Some(i),
        _ => None,
    }
}

impl ProvStore {
    /// Checks the provenance graph against its structural rules and replays
    /// every stored state from its predecessor.
    pub fn verify_history(&self) -> Report {
        let mut report = Report::default();
        let mut graphs: BTreeSet<String> = BTreeSet::new();
        for t in self.prov.iter() {
            for a in [&t.subject, &t.object] {
                if let Some((base, _, _)) = parse_minted_atom(a) {
                    graphs.insert(base.to_string());
                }
            }
            if (t.predicate.as_iri() == Some(VERSION) || t.predicate.as_iri() == Some(CURRENT))
                && parse_minted_atom(&t.subject).is_none()
            {
                if let Some(s) = t.subject.as_iri() {
                    graphs.insert(s.to_string());
                }
            }
        }
        for name in self.user.names() {
            match name.as_iri() {
                Some(iri) => {
                    graphs.insert(iri.to_string());
                }
                None => report.push(Rule::SingleCurrent, name, "user graph named by a literal cannot be tracked"),
            }
        }
        if !self.user.default_graph().is_empty() {
            graphs.insert(vocab::DEFAULT_GRAPH.to_string());
        }

        let mut metas = BTreeSet::new();
        let mut referenced_versions = BTreeSet::new();
        let mut referenced_data = BTreeSet::new();
        for giri in &graphs {
            self.verify_graph(giri, &mut report, &mut metas, &mut referenced_versions, &mut referenced_data);
        }

        for m in &metas {
            for p in [USER, TIME, TEXT] {
                let n = self.prov_objects(m, p).len();
                if n != 1 {
                    report.push(Rule::MetaFields, m, format!("{n} values for {p}"));
                }
            }
        }
        for v in self.versions.keys() {
            if !referenced_versions.contains(v) {
                report.push(Rule::Snapshot, v, "stored version is not on any chain");
            }
        }
        for d in self.data.keys() {
            if !referenced_data.contains(d) {
                report.push(Rule::DataGraph, d, "data graph is not linked from any update");
            }
        }
        report
    }

    fn verify_graph(
        &self,
        giri: &str,
        report: &mut Report,
        metas: &mut BTreeSet<Atom>,
        referenced_versions: &mut BTreeSet<Atom>,
        referenced_data: &mut BTreeSet<Atom>,
    ) {
        let g = Atom::iri(giri);
        let is_default = giri == vocab::DEFAULT_GRAPH;
        let currents = self.prov_objects(&g, CURRENT);
        let tracked_default = is_default && !currents.is_empty();
        let live = if is_default { tracked_default || !self.user.default_graph().is_empty() } else { self.is_live(giri) };
        if live && currents.len() != 1 {
            report.push(Rule::SingleCurrent, giri, format!("live graph has {} current versions", currents.len()));
        }
        if !live && !currents.is_empty() {
            report.push(Rule::SingleCurrent, giri, "dropped graph still has a current version");
        }

        // versions registered on the graph
        let mut versions: BTreeMap<usize, Atom> = BTreeMap::new();
        for v in self.prov_objects(&g, VERSION) {
            match version_index(v, giri) {
                Some(i) => {
                    versions.insert(i, v.clone());
                    referenced_versions.insert(v.clone());
                }
                None => report.push(Rule::LinearChain, giri, format!("{v} is not a version of this graph")),
            }
        }
        if let (Some(c), Some((&max, _))) = (currents.first(), versions.iter().next_back()) {
            if version_index(c, giri) != Some(max) {
                report.push(Rule::SingleCurrent, giri, format!("current {c} is not the newest version"));
            }
        }
        for c in &currents {
            if version_index(c, giri).is_none_or(|i| !versions.contains_key(&i)) {
                report.push(Rule::LinearChain, giri, format!("current {c} is not a registered version"));
            }
        }

        for (&i, v) in &versions {
            let next = self.prov_objects(v, VERSION);
            let prev = self.prov_objects(v, PREV_VERSION);
            if next.len() > 1 || prev.len() > 1 {
                report.push(Rule::LinearChain, v, "version branches");
            }
            for n in next {
                match version_index(n, giri) {
                    Some(j) if j > i && versions.contains_key(&j) => {}
                    _ => report.push(Rule::LinearChain, v, format!("successor {n} is not a later version")),
                }
                if !self.prov_objects(n, PREV_VERSION).contains(&v) {
                    report.push(Rule::VersionPairing, v, format!("{n} lacks the matching prevVersion link"));
                }
            }
            for p in prev {
                if !self.prov_objects(p, VERSION).contains(&v) {
                    report.push(Rule::VersionPairing, v, format!("prevVersion {p} lacks the matching version link"));
                }
            }
            if snapshot_decision(i, self.policy.interval) && !self.versions.contains_key(v) {
                report.push(Rule::Snapshot, v, "version required by the snapshot policy is not stored");
            }
        }

        // update records
        let mut updates: BTreeSet<usize> = BTreeSet::new();
        for t in self.prov.iter() {
            if let Some((base, IdKind::Update, k)) = parse_minted_atom(&t.subject) {
                if base == giri {
                    updates.insert(k);
                }
            }
        }
        let mut segment_starts = BTreeSet::new();
        for &k in &updates {
            let u = mint_atom(giri, IdKind::Update, k);
            let types = self.prov_objects(&u, TYPE);
            let kind = match types.as_slice() {
                [t] => t.as_iri().and_then(UpdateType::from_iri),
                _ => None,
            };
            let Some(kind) = kind else {
                report.push(Rule::UpdateType, &u, format!("expected one known type, found {}", types.len()));
                continue;
            };
            let ms = self.prov_objects(&u, META);
            match ms.as_slice() {
                [m] => {
                    metas.insert((*m).clone());
                }
                _ => report.push(Rule::UpdateMeta, &u, format!("expected one meta node, found {}", ms.len())),
            }

            let inputs = self.prov_objects(&u, INPUT);
            let outputs = self.prov_objects(&u, OUTPUT);
            let expected_out = mint_atom(giri, IdKind::Version, k);
            if kind == UpdateType::Create {
                segment_starts.insert(k);
                if !inputs.is_empty() {
                    report.push(Rule::InputLink, &u, "create has an input");
                }
            } else {
                match inputs.as_slice() {
                    [v] if version_index(v, giri).is_some_and(|j| j < k && versions.contains_key(&j)) => {
                        if kind != UpdateType::Drop && !self.prov_objects(v, VERSION).contains(&&expected_out) {
                            report.push(Rule::VersionPairing, &u, format!("input {v} does not link to the output"));
                        }
                    }
                    _ => report.push(Rule::InputLink, &u, "expected one earlier version of the graph as input"),
                }
            }
            if kind == UpdateType::Drop {
                if !outputs.is_empty() {
                    report.push(Rule::OutputLink, &u, "drop has an output");
                }
            } else if outputs.as_slice() != [&expected_out] || !versions.contains_key(&k) {
                report.push(Rule::OutputLink, &u, format!("expected output {expected_out}"));
            }
            let sources = self.prov_objects(&u, SOURCE);
            match kind {
                UpdateType::Load | UpdateType::Add | UpdateType::Copy | UpdateType::Move if sources.len() != 1 => {
                    report.push(Rule::SourceLink, &u, format!("expected one source, found {}", sources.len()));
                }
                UpdateType::Create | UpdateType::Drop | UpdateType::Clear if !sources.is_empty() => {
                    report.push(Rule::SourceLink, &u, "record kind takes no sources");
                }
                _ => {}
            }
            let data = self.prov_objects(&u, DATA);
            if matches!(kind, UpdateType::Insert | UpdateType::Delete) {
                let d = mint_atom(giri, IdKind::Data, k);
                if data.as_slice() != [&d] {
                    report.push(Rule::DataLink, &u, format!("expected data link to {d}"));
                } else {
                    referenced_data.insert(d.clone());
                    if self.policy.materialize_data && !self.data.contains_key(&d) {
                        report.push(Rule::DataGraph, &d, "data graph is missing");
                    }
                }
            } else if !data.is_empty() {
                report.push(Rule::DataLink, &u, "only inserts and deletes carry data");
            }
        }
        for (&i, v) in &versions {
            let bootstrap = is_default && i == 0 && !updates.contains(&0);
            if !bootstrap && !updates.contains(&i) {
                report.push(Rule::OutputLink, v, "no update produced this version");
            }
            let has_prev = !self.prov_objects(v, PREV_VERSION).is_empty();
            if !bootstrap && !segment_starts.contains(&i) && !has_prev {
                report.push(Rule::VersionPairing, v, "version has no prevVersion link");
            }
        }

        self.verify_replay(giri, &versions, &segment_starts, report);
    }

    /// Replays each stored state (snapshots, data graphs and the live
    /// graph) from its predecessor and compares.
    fn verify_replay(&self, giri: &str, versions: &BTreeMap<usize, Atom>, segment_starts: &BTreeSet<usize>, report: &mut Report) {
        let name = graph_name(giri);
        let live_current = match self.current_version(&name) {
            Ok((c, _)) if self.is_live(giri) => Some(c),
            _ => None,
        };
        let mut cache = Cache::new();
        for (&i, v) in versions {
            let mut stored: Vec<(&str, Graph)> = Vec::new();
            if let Some(g) = self.versions.get(v) {
                stored.push(("stored snapshot", g.clone()));
            }
            if live_current == Some(i) {
                stored.push(("live graph", self.user.graph(&name).cloned().unwrap_or_default()));
            }
            let needs_text = |kind: UpdateType| match kind {
                UpdateType::Insert | UpdateType::Delete => !self.data.contains_key(&mint_atom(giri, IdKind::Data, i)),
                UpdateType::Load | UpdateType::Add | UpdateType::Copy | UpdateType::Move => true,
                _ => false,
            };
            let kind = self.record_type(giri, i).ok();
            // inserts and deletes with a stored data graph: the data graph must
            // match what the recorded text selects
            if let Some(kind @ (UpdateType::Insert | UpdateType::Delete)) = kind {
                let d = mint_atom(giri, IdKind::Data, i);
                if let (Some(data), true) = (self.data.get(&d), self.text_replayable(giri, i)) {
                    match self.replay_data(giri, i, kind, &mut cache) {
                        Ok(expected) if &expected == data => {}
                        Ok(_) => report.push(Rule::Replay, &d, "data graph disagrees with the recorded update"),
                        Err(e) => report.push(Rule::Replay, &d, e.to_string()),
                    }
                }
            }
            if stored.is_empty() {
                continue;
            }
            let replayed = if segment_starts.contains(&i) {
                Ok(Graph::new())
            } else if kind.is_none() {
                // the default graph's bootstrap version or a broken record;
                // the structural checks cover both
                continue;
            } else if kind.is_some_and(needs_text) && !self.text_replayable(giri, i) {
                continue;
            } else {
                self.input_index(giri, i)
                    .and_then(|j| self.reconstruct_cached(giri, j, &mut cache))
                    .and_then(|input| self.replay_step(giri, i, input, &mut cache))
            };
            match replayed {
                Ok(r) => {
                    for (what, g) in stored {
                        if g != r {
                            report.push(Rule::Replay, v, format!("{what} disagrees with replay"));
                        }
                    }
                }
                Err(e) => report.push(Rule::Replay, v, e.to_string()),
            }
        }
    }

    fn text_replayable(&self, giri: &str, k: usize) -> bool {
        let u = mint_atom(giri, IdKind::Update, k);
        let metas = self.prov_objects(&u, META);
        let [m] = metas.as_slice() else {
            return false;
        };
        let texts = self.prov_objects(m, TEXT);
        let [Atom::Literal(text)] = texts.as_slice() else {
            return false;
        };
        match crate::syntax::parse_update(text.lexical()) {
            Ok(u) => text_reproduces(&u, text.lexical()),
            Err(_) => false,
        }
    }
}
