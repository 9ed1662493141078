//! Heterogeneous graph structure learning from smooth node signals.
//!
//! Edge weights and edge types are estimated jointly with per-relation
//! dimension weights by alternating a primal-dual graph step with a relation
//! embedding update. A synthetic generator and an evaluation suite are
//! included.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dgp;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod solver;

pub use error::{Error, Result};
