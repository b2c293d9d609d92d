//! Regular path query evaluation over local and distributed graph data.
//!
//! The crate provides:
//!
//! - an edge-labeled graph with an on-demand inverse-extended view
//!   ([`graph`]),
//! - a path expression language with inverse labels, wildcard, and label
//!   classes, compiled to an NFA ([`query`]),
//! - a lazy product-automaton query engine over pluggable edge sources
//!   ([`engine`]),
//! - a deterministic peer-network simulator with flooding broadcast and an
//!   exact message-cost ledger ([`netsim`]),
//! - the top-down (s1) and bottom-up (s2) distributed execution strategies
//!   with per-query cost records ([`strategies`]),
//! - analytic cost functions and the strategy decision rule ([`cost`]),
//! - statistical graph models for Monte-Carlo query cost estimation
//!   ([`models`]).

pub mod cost;
pub mod engine;
pub mod error;
pub mod graph;
pub mod models;
pub mod netsim;
pub mod query;
pub mod rng;
pub mod strategies;

pub use error::{Error, ErrorClass, Result};
