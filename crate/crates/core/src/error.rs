use thiserror::Error;

use crate::mutations::MutationKind;
use crate::phase::SymbolId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {0} has no bound value")]
    UnboundSymbol(SymbolId),
    #[error("diagram too large to contract: {wires} open wires (limit {limit})")]
    DiagramTooLarge { wires: usize, limit: usize },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("diagram is not graph-like: {0}")]
    NotGraphLike(String),
    #[error("no gflow: {0}")]
    NoGflow(String),
    #[error("no candidate for mutation {0:?}")]
    NoCandidate(MutationKind),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unknown target function `{0}`")]
    UnknownTarget(String),
    #[error("underdetermined fit: {rows} rows for {params} parameters")]
    Underdetermined { rows: usize, params: usize },
    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("parse error: {0}")]
    Parse(String),
}
