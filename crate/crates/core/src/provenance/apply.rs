use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Atom, Dataset, Graph, GraphName};
use crate::query::eval_construct;
use crate::store::snapshot_decision;
use crate::syntax::ast::{BasicPattern, Block, Pattern, TermPattern, Update};
use crate::syntax::parse_update;
use crate::update::apply_update;

use super::ids::{graph_name, is_reserved, mint, mint_atom, tracked_iri, IdKind};
use super::sources::pattern_sources;
use super::vocab::{self, UpdateType, CURRENT, DATA, INPUT, META, OUTPUT, PREV_VERSION, SOURCE, TEXT, TIME, TYPE, USER, VERSION};
use super::{ProvError, ProvStore, UpdateMeta};

/// One provenance record written by an update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedRecord {
    pub graph: GraphName,
    pub index: usize,
    pub kind: UpdateType,
    /// The version the record produced; `None` for drops.
    pub output: Option<Atom>,
}

enum Step {
    Create(GraphName),
    Drop(GraphName),
    /// Clear, load, add, copy or move into the graph.
    Transform {
        graph: GraphName,
        kind: UpdateType,
        source: Option<Atom>,
    },
    Data {
        graph: GraphName,
        kind: UpdateType,
        data: Graph,
        sources: Vec<Atom>,
    },
}

impl Step {
    fn graph(&self) -> &GraphName {
        match self {
            Step::Create(g) | Step::Drop(g) => g,
            Step::Transform { graph, .. } | Step::Data { graph, .. } => graph,
        }
    }
}

fn violation(msg: impl Into<String>) -> ProvError {
    ProvError::TargetViolation(msg.into())
}

fn check_target(g: &GraphName) -> Result<(), ProvError> {
    match g {
        GraphName::Default => Ok(()),
        GraphName::Named(a) => match a.as_iri() {
            Some(iri) if is_reserved(iri) => Err(violation(format!("{a} is reserved for provenance data"))),
            Some(_) => Ok(()),
            None => Err(violation(format!("graph name {a} is not an IRI"))),
        },
    }
}

/// The single graph a template writes to.
fn template_target(c: &BasicPattern) -> Result<GraphName, ProvError> {
    let mut target: Option<GraphName> = None;
    for block in c.blocks() {
        let g = match block {
            Block::Default(_) => GraphName::Default,
            Block::Graph {
                name: TermPattern::Atom(a), ..
            } => GraphName::Named(a.clone()),
            Block::Graph { name, .. } => {
                return Err(violation(format!("template graph {name} is not statically known")));
            }
        };
        match &target {
            Some(t) if *t != g => return Err(violation(format!("template writes to both {t} and {g}"))),
            _ => target = Some(g),
        }
    }
    let g = target.ok_or_else(|| violation("template is empty"))?;
    check_target(&g)?;
    Ok(g)
}

/// True when `text` parses, deterministically, to `u`; only then can the
/// record be replayed from its text.
pub(super) fn text_reproduces(u: &Update, text: &str) -> bool {
    match (parse_update(text), parse_update(text)) {
        (Ok(a), Ok(b)) => a == b && a == *u,
        _ => false,
    }
}

impl ProvStore {
    /// Applies `u` to the user graphs and appends its provenance records.
    ///
    /// Nothing changes if the update is rejected. Insert and delete templates
    /// must each write to one statically named graph. An insert that adds
    /// nothing to an undefined graph, and a delete from an undefined graph,
    /// change no data and write no record.
    pub fn apply_with_provenance(&mut self, u: &Update, meta: &UpdateMeta) -> Result<Vec<AppliedRecord>, ProvError> {
        let steps = self.plan(u)?;
        let post = apply_update(u, &self.user)?;
        let mut created = BTreeSet::new();
        for step in &steps {
            let g = step.graph();
            if let Step::Create(g) = step {
                created.insert(g.clone());
            } else if *g != GraphName::Default && !created.contains(g) {
                self.current_version(g)?;
            }
            let giri = tracked_iri(g).expect("checked target");
            let k = self.next_index.get(giri).copied().unwrap_or(0);
            for kind in [IdKind::Version, IdKind::Data] {
                let name = GraphName::iri(mint(giri, kind, k));
                if self.user.is_defined(&name) {
                    return Err(violation(format!("minted name {name} is already a user graph")));
                }
            }
        }
        let replayable = text_reproduces(u, &meta.text);
        Ok(self.write(steps, post, meta, replayable))
    }

    fn plan(&self, u: &Update) -> Result<Vec<Step>, ProvError> {
        let steps = match u {
            Update::Create(g) => {
                check_target(g)?;
                vec![Step::Create(g.clone())]
            }
            Update::Drop(g) => {
                check_target(g)?;
                vec![Step::Drop(g.clone())]
            }
            Update::Clear(g) => {
                check_target(g)?;
                vec![Step::Transform {
                    graph: g.clone(),
                    kind: UpdateType::Clear,
                    source: None,
                }]
            }
            Update::Load { source, target }
            | Update::Add { source, target }
            | Update::Copy { source, target }
            | Update::Move { source, target } => {
                check_target(source)?;
                check_target(target)?;
                let kind = match u {
                    Update::Load { .. } => UpdateType::Load,
                    Update::Add { .. } => UpdateType::Add,
                    Update::Copy { .. } => UpdateType::Copy,
                    _ => UpdateType::Move,
                };
                let mut steps = vec![Step::Transform {
                    graph: target.clone(),
                    kind,
                    source: Some(self.source_iri(source)),
                }];
                if kind == UpdateType::Move && source != target {
                    steps.push(Step::Drop(source.clone()));
                }
                steps
            }
            Update::InsertWhere { template, pattern } => {
                self.data_steps(&[(template, UpdateType::Insert)], pattern)?
            }
            Update::DeleteWhere { template, pattern } => {
                self.data_steps(&[(template, UpdateType::Delete)], pattern)?
            }
            Update::DeleteInsertWhere { delete, insert, pattern } => {
                self.data_steps(&[(delete, UpdateType::Delete), (insert, UpdateType::Insert)], pattern)?
            }
        };
        Ok(steps)
    }

    fn data_steps(&self, parts: &[(&BasicPattern, UpdateType)], pattern: &Pattern) -> Result<Vec<Step>, ProvError> {
        let targets = parts
            .iter()
            .map(|(c, _)| template_target(c))
            .collect::<Result<Vec<_>, _>>()?;
        let sources: Vec<Atom> = pattern_sources(pattern, &self.user)
            .iter()
            .map(|s| self.source_iri(s))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut steps = Vec::new();
        for ((template, kind), g) in parts.iter().zip(targets) {
            let data = eval_construct(template, pattern, &self.user).graph(&g).cloned().unwrap_or_default();
            let defined = self.user.is_defined(&g) || steps.iter().any(|s: &Step| s.graph() == &g);
            if !defined {
                if *kind == UpdateType::Delete || data.is_empty() {
                    continue;
                }
                steps.push(Step::Create(g.clone()));
            }
            steps.push(Step::Data {
                graph: g,
                kind: *kind,
                data,
                sources: sources.clone(),
            });
        }
        Ok(steps)
    }

    /// How a record names a graph it read: its current version when the
    /// graph is tracked, otherwise the graph IRI itself.
    fn source_iri(&self, g: &GraphName) -> Atom {
        match self.current_version(g) {
            Ok((_, v)) => v,
            Err(_) => Atom::iri(tracked_iri(g).expect("sources are IRIs or the default graph")),
        }
    }

    fn write(&mut self, steps: Vec<Step>, post: Dataset, meta: &UpdateMeta, replayable: bool) -> Vec<AppliedRecord> {
        let mut records = Vec::new();
        let mut meta_node: Option<Atom> = None;
        // contents of touched graphs as the steps progress
        let mut working: BTreeMap<GraphName, Graph> = BTreeMap::new();

        for step in steps {
            let g = step.graph().clone();
            let giri = tracked_iri(&g).expect("checked target").to_string();
            if g == GraphName::Default {
                self.track_default();
            }
            let k = self.take_index(&giri);
            let u = mint_atom(&giri, IdKind::Update, k);
            let m = meta_node.get_or_insert_with(|| mint_atom(&giri, IdKind::Meta, k)).clone();
            let before = working
                .get(&g)
                .cloned()
                .or_else(|| self.user.graph(&g).cloned())
                .unwrap_or_default();

            let (kind, output) = match step {
                Step::Create(_) => {
                    let v = self.emit_version(&giri, k, None, &Graph::new(), true);
                    working.insert(g.clone(), Graph::new());
                    (UpdateType::Create, Some(v))
                }
                Step::Drop(_) => {
                    let (_, current) = self.retire_current(&giri);
                    self.add_prov(u.clone(), INPUT, current);
                    working.remove(&g);
                    (UpdateType::Drop, None)
                }
                Step::Transform { kind, source, .. } => {
                    let content = post.graph(&g).cloned().unwrap_or_default();
                    let (_, current) = self.retire_current(&giri);
                    self.add_prov(u.clone(), INPUT, current.clone());
                    if let Some(src) = source {
                        self.add_prov(u.clone(), SOURCE, src);
                    }
                    let force = !replayable && kind != UpdateType::Clear;
                    let v = self.emit_version(&giri, k, Some(current), &content, force);
                    working.insert(g.clone(), content);
                    (kind, Some(v))
                }
                Step::Data { kind, data, sources, .. } => {
                    let content = if kind == UpdateType::Insert {
                        before.union(&data)
                    } else {
                        before.difference(&data)
                    };
                    let (_, current) = self.retire_current(&giri);
                    self.add_prov(u.clone(), INPUT, current.clone());
                    let d = mint_atom(&giri, IdKind::Data, k);
                    self.add_prov(u.clone(), DATA, d.clone());
                    if self.policy.materialize_data {
                        self.data.insert(d, data);
                    }
                    for s in sources {
                        self.add_prov(u.clone(), SOURCE, s);
                    }
                    let force = !replayable && !self.policy.materialize_data;
                    let v = self.emit_version(&giri, k, Some(current), &content, force);
                    working.insert(g.clone(), content);
                    (kind, Some(v))
                }
            };
            self.add_prov(u.clone(), TYPE, kind.atom());
            if let Some(v) = &output {
                self.add_prov(u.clone(), OUTPUT, v.clone());
            }
            self.add_prov(u, META, m);
            records.push(AppliedRecord {
                graph: g,
                index: k,
                kind,
                output,
            });
        }

        if let Some(m) = meta_node {
            self.add_prov(m.clone(), USER, meta.user.clone());
            self.add_prov(m.clone(), TIME, meta.time_literal());
            self.add_prov(m.clone(), TEXT, Atom::literal(meta.text.clone()));
            for (p, o) in &meta.extra {
                self.prov.insert(crate::model::Triple::new(m.clone(), p.clone(), o.clone()));
            }
        }
        for (g, content) in &working {
            debug_assert_eq!(post.graph(g), Some(content), "provenance steps diverged from the update engine on {g}");
        }
        self.user = post;
        records
    }

    fn take_index(&mut self, giri: &str) -> usize {
        let next = self.next_index.entry(giri.to_string()).or_insert(0);
        let k = *next;
        *next += 1;
        k
    }

    /// Starts the default graph's chain with an unattributed version 0 the
    /// first time the default graph is written.
    fn track_default(&mut self) {
        if self.current_version(&GraphName::Default).is_ok() {
            return;
        }
        let k = self.take_index(vocab::DEFAULT_GRAPH);
        let content = self.user.default_graph().clone();
        self.emit_version(vocab::DEFAULT_GRAPH, k, None, &content, true);
    }

    /// Removes and returns the `upd:current` link of a tracked graph.
    fn retire_current(&mut self, giri: &str) -> (usize, Atom) {
        let (i, v) = self
            .current_version(&graph_name(giri))
            .expect("every defined graph written through the store has a current version");
        self.prov.remove(&crate::model::Triple::new(Atom::iri(giri), Atom::iri(CURRENT), v.clone()));
        (i, v)
    }

    fn emit_version(&mut self, giri: &str, k: usize, prev: Option<Atom>, content: &Graph, force: bool) -> Atom {
        let g = Atom::iri(giri);
        let v = mint_atom(giri, IdKind::Version, k);
        self.add_prov(g.clone(), VERSION, v.clone());
        self.add_prov(g, CURRENT, v.clone());
        if let Some(p) = prev {
            self.add_prov(p.clone(), VERSION, v.clone());
            self.add_prov(v.clone(), PREV_VERSION, p);
        }
        if force || snapshot_decision(k, self.policy.interval) {
            self.versions.insert(v.clone(), content.clone());
        }
        v
    }
}
