//! The aspect language: `.aw` files of `aspectdef` blocks holding selects,
//! applies and calls to other aspects.
//!
//! Applies and calls run in textual order. A select is evaluated when its
//! apply runs, so an apply sees the edits of the ones before it. Each
//! tuple is checked against the condition, then the actions run in order.
//!
//! ```
//! use std::collections::BTreeMap;
//! use aweave::dsl::{parse_aspects, run_aspects};
//! use aweave::frontend::parse;
//! use aweave::weave::Session;
//!
//! let program = parse_aspects(r#"
//! aspectdef TimeCalls
//!   input $func end
//!   select c: function{name == $func}.call end
//!   apply to c
//!     insert before "double t0 = now();"
//!     insert after "log_time(\"%{$call.name}\", now() - t0);"
//!   end
//! end
//! "#).unwrap();
//! let mut s = Session::new(parse("void f(void) {\n    g();\n}\n", "f.c").unwrap());
//! let args = BTreeMap::from([("func".to_string(), "f".to_string())]);
//! run_aspects(&program, &mut s, None, &args).unwrap();
//! assert_eq!(
//!     s.ast().emit(),
//!     "void f(void) {\n    double t0 = now();\n    g();\n    log_time(\"g\", now() - t0);\n}\n"
//! );
//! assert_eq!(program.sloc(), 5);
//! ```

mod ast;
mod builtins;
mod interp;
mod parse;
mod validate;

pub use ast::*;
pub use builtins::{predefined, Predefined, PREDEFINED};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::weave::Session;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("line {line}: unknown join point binding `{name}`")]
    UnknownBinding { line: u32, name: String },
    #[error("line {line}: {kind} join points have no attribute `{name}`")]
    UnknownAttribute { line: u32, kind: String, name: String },
    #[error("line {line}: illegal select chain: `{child}` cannot follow `{parent}`")]
    IllegalChain { line: u32, parent: String, child: String },
    #[error("line {line}: {what} `{name}` is defined twice")]
    Duplicate { line: u32, what: &'static str, name: String },
    #[error("aspect `{aspect}`, line {line}: apply refers to undeclared select `{name}`")]
    UnknownSelectRef { aspect: String, line: u32, name: String },
    #[error("aspect `{aspect}`, line {line}: call to unknown aspect `{name}`")]
    UnknownAspectRef { aspect: String, line: u32, name: String },
    #[error("aspects call each other in a cycle: {}", .0.join(" -> "))]
    RecursionCycle(Vec<String>),
    #[error("no aspect named `{0}`")]
    UnknownAspect(String),
    #[error("aspect `{aspect}` needs input `{input}`")]
    MissingInput { aspect: String, input: String },
    #[error("aspect `{aspect}` has no input `{name}`")]
    UnknownInput { aspect: String, name: String },
    #[error("aspect `{aspect}`, line {line}: {message}")]
    Action { aspect: String, line: u32, message: String },
}

/// Parses and validates an aspect program.
pub fn parse_aspects(text: &str) -> Result<AspectProgram, DslError> {
    let p = parse::parse_program(text)?;
    validate::validate(&p)?;
    Ok(p)
}

/// Runs aspect `entry` of `program` (its first aspect when `None`) on the
/// session. `entry` may also name a [predefined](PREDEFINED) aspect.
/// Arguments are keyed by input name; values that read as integers or
/// booleans are passed as such.
pub fn run_aspects(
    program: &AspectProgram,
    session: &mut Session,
    entry: Option<&str>,
    args: &BTreeMap<String, String>,
) -> Result<(), DslError> {
    interp::run(program, session, entry, args)
}
