//! Versioned RDF dataset store that records the provenance of every update.

pub mod cli;
pub mod model;
pub mod provenance;
pub mod query;
pub mod store;
pub mod syntax;
pub mod update;

pub use model::{Atom, Dataset, Graph, GraphName, Literal, Triple};
pub use provenance::{ProvError, ProvStore, UpdateMeta};
pub use query::{eval_query, QueryResult, Valuation};
pub use store::{Store, StoreConfig};
pub use syntax::{parse_query, parse_update, Query, Update};
pub use update::{apply_update, UpdateError};
