use crate::model::{Atom, GraphName};

use super::ids::{parse_minted_atom, tracked_iri, IdKind};
use super::vocab::{self, UpdateType, META, TEXT, TIME, TYPE, USER};
use super::{ProvError, ProvStore};

/// One update recorded on a graph's chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub index: usize,
    pub kind: UpdateType,
    pub meta: Atom,
    pub user: Option<Atom>,
    pub time: Option<String>,
    pub text: Option<String>,
}

impl ProvStore {
    /// Updates recorded for `g`, oldest first. Unknown graphs have no entries.
    pub fn history_log(&self, g: &GraphName) -> Result<Vec<LogEntry>, ProvError> {
        let Some(giri) = tracked_iri(g) else {
            return Ok(Vec::new());
        };
        let type_p = vocab::iri(TYPE);
        let mut out = Vec::new();
        for t in self.prov.iter().filter(|t| t.predicate == type_p) {
            let Some((base, IdKind::Update, index)) = parse_minted_atom(&t.subject) else {
                continue;
            };
            if base != giri {
                continue;
            }
            let kind = t
                .object
                .as_iri()
                .and_then(UpdateType::from_iri)
                .ok_or_else(|| ProvError::broken(&t.subject, format!("unknown update type {}", t.object)))?;
            let metas = self.prov_objects(&t.subject, META);
            let [meta] = metas.as_slice() else {
                return Err(ProvError::broken(&t.subject, "expected exactly one meta node"));
            };
            let one = |p: &str| self.prov_objects(meta, p).first().map(|a| (*a).clone());
            let lexical = |a: Atom| match a {
                Atom::Literal(l) => l.lexical().to_string(),
                Atom::Iri(i) => i,
            };
            out.push(LogEntry {
                index,
                kind,
                meta: (*meta).clone(),
                user: one(USER),
                time: one(TIME).map(lexical),
                text: one(TEXT).map(lexical),
            });
        }
        out.sort_by_key(|e| e.index);
        Ok(out)
    }
}
