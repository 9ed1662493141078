use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("solver diverged at iteration {iteration} (step {step:e})")]
    Divergence { iteration: usize, step: f64 },
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension(format!(
            "{what}: length {got}, expected {expected}"
        )));
    }
    Ok(())
}
