//! Join points, select chains and the weaving actions that edit an [`Ast`].
//!
//! A [`Session`] owns the tree being woven together with its
//! [`WeaveReport`] counters.
//!
//! ```
//! use aweave::frontend::parse;
//! use aweave::weave::{JpKind, Place, SelectChain, Session, Step};
//!
//! let ast = parse("void f(void) {\n    g();\n}\n", "f.c").unwrap();
//! let mut s = Session::new(ast);
//! let chain = SelectChain::new(vec![Step::new(JpKind::Function), Step::new(JpKind::Call)]);
//! let tuples = s.select(&chain).unwrap();
//! s.insert(tuples[0][1], Place::Before, "double t0 = now();").unwrap();
//! assert_eq!(s.ast().emit(), "void f(void) {\n    double t0 = now();\n    g();\n}\n");
//! assert_eq!(s.report().native_sloc, 1);
//! ```

mod joinpoint;
mod report;
mod select;
mod session;

pub use joinpoint::{classify, loop_index_var, JoinPoint, JpKind, Value};
pub use report::{static_metrics, StaticMetrics, WeaveReport, METRICS_HEADER, REPORT_HEADER};
pub use select::{Filter, FilterOp, SelectChain, Step};
pub use session::{Place, Session};

pub(crate) use joinpoint::enclosing_statement;

use thiserror::Error;

use crate::frontend::FrontendError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeaveError {
    #[error("illegal select chain: `{child}` cannot follow `{parent}`")]
    IllegalChain { parent: String, child: String },
    #[error("unknown attribute `{name}` on {kind} join point")]
    UnknownAttribute { kind: String, name: String },
    #[error("code fragment does not parse: {0}")]
    ParseErrorInFragment(String),
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("join point refers to a node that was replaced or removed")]
    StaleJoinPoint,
    #[error("setType needs a decl or function join point, got {0}")]
    NotADecl(String),
    #[error("name `{0}` is already defined")]
    DuplicateName(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}
