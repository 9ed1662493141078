//! Files, seeded experiments and studies around `hgsl-core`.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;
pub mod study;

pub use error::{HarnessError, Result};
