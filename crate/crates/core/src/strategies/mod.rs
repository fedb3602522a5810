//! Reusable program transformations built on a weave [`Session`](crate::weave::Session).

mod access;
pub mod clone;
pub mod memoize;
pub mod multiversion;
pub mod parallelize;
pub mod precision;
pub mod purity;
pub mod runtime;

pub use clone::{call_tree, clone_call_tree, create_typed_version, mixed_assignments, mixed_precision_versions, MixedVersion};
pub use memoize::{memo_header, memo_slot, memo_source, memoize, MemoConfig, MemoOutput, MemoPolicy};
pub use multiversion::{check_signature, multiversion};
pub use parallelize::{analyze_loops, auto_parallelize, disable_nested_parallel_pragmas, LoopVerdict, ParallelizationReport, Reduction};
pub use precision::{change_precision, change_type, retarget_literal, PrecisionMap};
pub use purity::{analyze, detect_memoizable, pure_functions, FunctionFacts, PURE_LIBRARY};

use crate::weave::WeaveError;

#[derive(Debug, thiserror::Error)]
pub enum StrategyError {
    #[error("function `{0}` not found")]
    FunctionNotFound(String),
    #[error("name `{0}` already exists")]
    DuplicateName(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("call to `{0}` is not a statement or a simple assignment")]
    NotAStatementCall(String),
    #[error("unsupported signature: {0}")]
    UnsupportedSignature(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Weave(#[from] WeaveError),
}
