use std::collections::HashMap;

use crate::model::{Atom, Dataset, Graph, GraphName};
use crate::query::eval_construct;
use crate::syntax::ast::Update;
use crate::syntax::parse_update;
use crate::update::apply_update;

use super::ids::{graph_name, mint, mint_atom, parse_minted_atom, tracked_iri, IdKind};
use super::vocab::{self, UpdateType, INPUT, META, SOURCE, TEXT, TYPE, VERSION};
use super::{ProvError, ProvStore};

pub(super) type Cache = HashMap<(String, usize), Graph>;

impl ProvStore {
    /// Contents of version `i` of `g`.
    ///
    /// Stored snapshots and the live graph are returned as they are. Other
    /// versions are rebuilt from the nearest earlier stored state by
    /// replaying the recorded updates.
    pub fn reconstruct(&self, g: &GraphName, i: usize) -> Result<Graph, ProvError> {
        let giri = tracked_iri(g).ok_or_else(|| ProvError::UnknownVersion { graph: g.clone(), index: i })?;
        self.reconstruct_cached(giri, i, &mut Cache::new())
    }

    pub(super) fn version_exists(&self, giri: &str, i: usize) -> bool {
        self.prov
            .contains(&crate::model::Triple::new(Atom::iri(giri), vocab::iri(VERSION), mint_atom(giri, IdKind::Version, i)))
    }

    /// A stored state of the version, if there is one.
    fn stored(&self, giri: &str, i: usize) -> Option<Graph> {
        let v = mint_atom(giri, IdKind::Version, i);
        if let Some(g) = self.versions.get(&v) {
            return Some(g.clone());
        }
        match self.current_version(&graph_name(giri)) {
            Ok((c, _)) if c == i && self.is_live(giri) => self.user.graph(&graph_name(giri)).cloned(),
            _ => None,
        }
    }

    pub(super) fn reconstruct_cached(&self, giri: &str, i: usize, cache: &mut Cache) -> Result<Graph, ProvError> {
        if !self.version_exists(giri, i) {
            return Err(ProvError::UnknownVersion {
                graph: graph_name(giri),
                index: i,
            });
        }
        // walk back to a version whose contents are known without replay
        let mut pending = Vec::new();
        let mut k = i;
        let mut state = loop {
            if let Some(g) = cache.get(&(giri.to_string(), k)) {
                break g.clone();
            }
            if let Some(g) = self.stored(giri, k) {
                break g;
            }
            match self.record_type(giri, k)? {
                UpdateType::Create | UpdateType::Clear => break Graph::new(),
                _ => {
                    pending.push(k);
                    k = self.input_index(giri, k)?;
                }
            }
        };
        cache.insert((giri.to_string(), k), state.clone());
        while let Some(k) = pending.pop() {
            state = self.replay_step(giri, k, state, cache)?;
            cache.insert((giri.to_string(), k), state.clone());
        }
        Ok(state)
    }

    pub(super) fn record_type(&self, giri: &str, k: usize) -> Result<UpdateType, ProvError> {
        let u = mint_atom(giri, IdKind::Update, k);
        let types = self.prov_objects(&u, TYPE);
        match types.as_slice() {
            [t] => t
                .as_iri()
                .and_then(UpdateType::from_iri)
                .ok_or_else(|| ProvError::broken(&u, format!("unknown update type {t}"))),
            [] => Err(ProvError::broken(&u, "missing update record")),
            _ => Err(ProvError::broken(&u, "more than one type")),
        }
    }

    pub(super) fn input_index(&self, giri: &str, k: usize) -> Result<usize, ProvError> {
        let u = mint_atom(giri, IdKind::Update, k);
        match self.prov_objects(&u, INPUT).as_slice() {
            [v] => match parse_minted_atom(v) {
                Some((base, IdKind::Version, j)) if base == giri && j < k => Ok(j),
                _ => Err(ProvError::broken(&u, format!("input {v} is not an earlier version of {giri}"))),
            },
            _ => Err(ProvError::broken(&u, "expected exactly one input")),
        }
    }

    fn record_text(&self, giri: &str, k: usize) -> Result<Update, ProvError> {
        let u = mint_atom(giri, IdKind::Update, k);
        let metas = self.prov_objects(&u, META);
        let [m] = metas.as_slice() else {
            return Err(ProvError::broken(&u, "expected exactly one meta node"));
        };
        let texts = self.prov_objects(m, TEXT);
        let [Atom::Literal(text)] = texts.as_slice() else {
            return Err(ProvError::broken(m, "expected exactly one text literal"));
        };
        parse_update(text.lexical()).map_err(|e| ProvError::broken(m, format!("recorded text does not parse: {e}")))
    }

    /// The recorded source as a graph name and its contents at that time.
    fn source_state(&self, src: &Atom, cache: &mut Cache) -> Result<(GraphName, Graph), ProvError> {
        match (src.as_iri(), parse_minted_atom(src)) {
            // an untracked default graph has never been written
            (Some(vocab::DEFAULT_GRAPH), _) => Ok((GraphName::Default, Graph::new())),
            (_, Some((base, IdKind::Version, j))) => {
                let base = base.to_string();
                Ok((graph_name(&base), self.reconstruct_cached(&base, j, cache)?))
            }
            _ => Err(ProvError::broken(src, "source is neither a version nor the default graph")),
        }
    }

    /// Computes version `k` of the graph from version `k`'s input state.
    pub(super) fn replay_step(&self, giri: &str, k: usize, input: Graph, cache: &mut Cache) -> Result<Graph, ProvError> {
        let u = mint_atom(giri, IdKind::Update, k);
        let g = graph_name(giri);
        match self.record_type(giri, k)? {
            UpdateType::Create | UpdateType::Clear => Ok(Graph::new()),
            UpdateType::Drop => Err(ProvError::broken(&u, "a drop produces no version")),
            kind @ (UpdateType::Insert | UpdateType::Delete) => {
                let data = match self.data.get(&mint_atom(giri, IdKind::Data, k)) {
                    Some(d) => d.clone(),
                    None => self.replay_data(giri, k, kind, cache)?,
                };
                Ok(if kind == UpdateType::Insert {
                    input.union(&data)
                } else {
                    input.difference(&data)
                })
            }
            UpdateType::Load | UpdateType::Add | UpdateType::Copy | UpdateType::Move => {
                let srcs = self.prov_objects(&u, SOURCE);
                let [src] = srcs.as_slice() else {
                    return Err(ProvError::broken(&u, "expected exactly one source"));
                };
                let (src_name, src_graph) = self.source_state(src, cache)?;
                let update = self.record_text(giri, k)?;
                let mut d = Dataset::new();
                d.set_graph(&src_name, src_graph);
                d.set_graph(&g, input);
                let out = apply_update(&update, &d).map_err(|e| ProvError::broken(&u, format!("replay failed: {e}")))?;
                out.graph(&g)
                    .cloned()
                    .ok_or_else(|| ProvError::broken(&u, "replay left the graph undefined"))
            }
        }
    }

    /// Re-evaluates the template of an insert or delete record against the
    /// recorded source versions.
    pub(super) fn replay_data(&self, giri: &str, k: usize, kind: UpdateType, cache: &mut Cache) -> Result<Graph, ProvError> {
        let u = mint_atom(giri, IdKind::Update, k);
        let (template, pattern) = match (kind, self.record_text(giri, k)?) {
            (UpdateType::Insert, Update::InsertWhere { template, pattern })
            | (UpdateType::Delete, Update::DeleteWhere { template, pattern }) => (template, pattern),
            (UpdateType::Insert, Update::DeleteInsertWhere { insert, pattern, .. }) => (insert, pattern),
            (UpdateType::Delete, Update::DeleteInsertWhere { delete, pattern, .. }) => (delete, pattern),
            (_, other) => {
                return Err(ProvError::broken(&u, format!("recorded text is a {} update", other.verb())));
            }
        };
        let mut d = Dataset::new();
        for src in self.prov_objects(&u, SOURCE) {
            let (name, graph) = self.source_state(src, cache)?;
            d.set_graph(&name, graph);
        }
        Ok(eval_construct(&template, &pattern, &d)
            .graph(&graph_name(giri))
            .cloned()
            .unwrap_or_default())
    }

    /// Version graph IRI for index `i` of `g`.
    pub fn version_iri(g: &GraphName, i: usize) -> Option<String> {
        tracked_iri(g).map(|giri| mint(giri, IdKind::Version, i))
    }
}

