//! Lossless lexer, parser and emitter for the supported C subset.
//!
//! The tree keeps every byte of the input (whitespace and comments
//! included), so an untouched [`Ast`] emits its source back unchanged.
//!
//! ```
//! let src = "int sq(int x) {\n    return x * x;\n}\n";
//! let ast = aweave::frontend::parse(src, "sq.c").unwrap();
//! assert_eq!(ast.emit(), src);
//! assert_eq!(aweave::frontend::count_sloc(&ast), 2);
//! ```

mod ast;
mod ctype;
mod lexer;
mod parser;
mod pretty;
mod sloc;
pub mod syntax;
mod token;

pub use ast::{join_tokens, Ast, Element, NodeData, NodeId, NodeKind};
pub use ctype::{change_base, CType, PointerLevel};
pub use lexer::{directive_name, is_floating_literal, lex};
pub use pretty::format_fragment;
pub use sloc::{count_sloc, count_sloc_nodes, count_sloc_text};
pub use token::{is_keyword, Pos, Token, TokenKind, QUALIFIERS, STORAGE_CLASSES, TYPE_KEYWORDS};

pub(crate) use parser::{parse_expression, parse_statements, parse_top_items};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax { line: u32, col: u32, expected: String },
    #[error("line {line}: unsupported construct: {construct}")]
    UnsupportedConstruct { line: u32, construct: String },
    #[error("cannot parse type `{0}`")]
    BadType(String),
}

/// Parses one translation unit.
pub fn parse(source: &str, file_name: &str) -> Result<Ast, FrontendError> {
    parser::parse(source, file_name)
}
