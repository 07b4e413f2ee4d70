//! Lexing, parsing, validation and rendering of dependency documents.
//!
//! Arithmetic operations chain strictly left to right unless parenthesized:
//! `p1 + p2 - p3 * p4` is `((p1 + p2) - p3) * p4`.

mod ast;
mod lexer;
mod parser;
mod render;
mod validate;

pub use ast::*;
pub use parser::{parse_idl, parse_unvalidated};
pub use render::{quote, render_dependency, render_idl, render_param, render_predicate};
pub use validate::{validate_model, Diagnostic, Rule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdlError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid dependency: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
}
