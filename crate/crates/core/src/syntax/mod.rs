//! Text syntax: the query/update language and the dataset line format.

pub mod ast;
pub mod nquads;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use ast::*;
pub use nquads::{parse_dataset, parse_term, serialize_dataset, serialize_graph};
pub use parser::{parse_query, parse_query_with, parse_update, parse_update_with, Skolemizer, SKOLEM_PREFIX};
pub use printer::{print_pattern, print_query, print_update};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: GRAPH blocks may contain only triple patterns, found {found}")]
    NestedInGraph { line: usize, column: usize, found: String },
}

impl SyntaxError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        SyntaxError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn nested(line: usize, column: usize, found: String) -> Self {
        SyntaxError::NestedInGraph { line, column, found }
    }

    pub fn line(&self) -> usize {
        match self {
            SyntaxError::Syntax { line, .. } | SyntaxError::NestedInGraph { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            SyntaxError::Syntax { column, .. } | SyntaxError::NestedInGraph { column, .. } => *column,
        }
    }

    pub fn is_nested_in_graph(&self) -> bool {
        matches!(self, SyntaxError::NestedInGraph { .. })
    }
}
