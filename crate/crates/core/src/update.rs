//! Applies one atomic update to a dataset. No provenance side effects.

use thiserror::Error;

use crate::model::{Dataset, Graph, GraphName};
use crate::query::eval_construct;
use crate::syntax::ast::Update;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("graph {0} already exists")]
    CreateExists(GraphName),
    #[error("graph {0} is not defined")]
    GraphUndefined(GraphName),
    #[error("{verb} is not allowed on the default graph")]
    InvalidDefaultTarget { verb: &'static str },
}

fn require<'d>(d: &'d Dataset, g: &GraphName) -> Result<&'d Graph, UpdateError> {
    d.graph(g).ok_or_else(|| UpdateError::GraphUndefined(g.clone()))
}

/// Returns the post-state of `u` applied to `d`.
///
/// `Drop`, `Clear`, `Copy`, `Move`, `Add` and `Load` require every graph
/// they name to be defined. `Create` and `Drop` reject the default graph, as
/// does `Move` from it, since moving undefines the source.
pub fn apply_update(u: &Update, d: &Dataset) -> Result<Dataset, UpdateError> {
    match u {
        Update::InsertWhere { template, pattern } => Ok(d.union(&eval_construct(template, pattern, d))),
        Update::DeleteWhere { template, pattern } => Ok(d.difference(&eval_construct(template, pattern, d))),
        Update::DeleteInsertWhere { delete, insert, pattern } => {
            // both templates see the pre-state
            let removed = eval_construct(delete, pattern, d);
            let added = eval_construct(insert, pattern, d);
            Ok(d.difference(&removed).union(&added))
        }
        Update::Load { source, target } | Update::Add { source, target } => {
            let merged = require(d, source)?.union(require(d, target)?);
            let mut out = d.clone();
            out.set_graph(target, merged);
            Ok(out)
        }
        Update::Clear(g) => {
            require(d, g)?;
            let mut out = d.clone();
            out.set_graph(g, Graph::new());
            Ok(out)
        }
        Update::Create(g) => {
            if *g == GraphName::Default {
                return Err(UpdateError::InvalidDefaultTarget { verb: "CREATE" });
            }
            if d.is_defined(g) {
                return Err(UpdateError::CreateExists(g.clone()));
            }
            let mut out = d.clone();
            out.set_graph(g, Graph::new());
            Ok(out)
        }
        Update::Drop(g) => {
            if *g == GraphName::Default {
                return Err(UpdateError::InvalidDefaultTarget { verb: "DROP" });
            }
            require(d, g)?;
            let mut out = d.clone();
            out.remove_graph(g);
            Ok(out)
        }
        Update::Copy { source, target } => {
            let src = require(d, source)?.clone();
            require(d, target)?;
            let mut out = d.clone();
            if source != target {
                out.set_graph(target, src);
            }
            Ok(out)
        }
        Update::Move { source, target } => {
            if *source == GraphName::Default {
                return Err(UpdateError::InvalidDefaultTarget { verb: "MOVE from" });
            }
            let src = require(d, source)?.clone();
            require(d, target)?;
            let mut out = d.clone();
            if source != target {
                out.set_graph(target, src);
                out.remove_graph(source);
            }
            Ok(out)
        }
    }
}
