//! Path expressions: concrete syntax, syntax tree, compiled automaton, and
//! the query wrapper used by the evaluation engine.

pub mod ast;
pub mod automaton;
pub mod parser;

pub use ast::RegexAst;
pub use automaton::{compile, QueryAutomaton, StateId, Symbol};
pub use parser::{parse_regex, ClassFile};

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::{LabelSet, NodeId};

/// Whether a query is anchored at one start node or asks for all pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    SingleSource(NodeId),
    MultiSource,
}

/// A compiled query: the automaton plus the properties cost accounting
/// needs.
#[derive(Debug, Clone)]
pub struct Query {
    pub automaton: QueryAutomaton,
    pub kind: QueryKind,
    pub uses_inverse: bool,
    pub uses_wildcard: bool,
    /// Forward base names of the labels appearing in the expression.
    pub distinct_labels: BTreeSet<String>,
}

impl Query {
    pub fn from_ast(ast: &RegexAst, kind: QueryKind) -> Query {
        Query {
            automaton: compile(ast),
            kind,
            uses_inverse: ast.uses_inverse(),
            uses_wildcard: ast.uses_wildcard(),
            distinct_labels: ast.distinct_labels(),
        }
    }

    pub fn parse(text: &str, classes: &ClassFile, kind: QueryKind) -> Result<Query> {
        Ok(Query::from_ast(&parse_regex(text, classes)?, kind))
    }

    /// Number of distinct labels in the expression.
    pub fn label_count(&self) -> u64 {
        self.distinct_labels.len() as u64
    }

    /// Symbols that can begin a matching path: the labels on transitions
    /// reachable from the initial state by epsilon moves alone.
    pub fn first_labels(&self) -> &LabelSet {
        self.automaton.closure_wanted(self.automaton.initial())
    }

    /// True when the empty word is in the query language.
    pub fn accepts_epsilon(&self) -> bool {
        self.automaton.accepts_epsilon()
    }

    pub fn is_single_source(&self) -> bool {
        matches!(self.kind, QueryKind::SingleSource(_))
    }
}
