//! Abstract syntax, parser and printer for Proto-Quipper-L programs.

mod ast;
mod lexer;
pub mod macros;
mod parser;
mod pretty;

pub use ast::*;
pub use lexer::{Span, Token, TokenKind};
pub use parser::{parse_channel, parse_pattern, parse_pattern_type, parse_program, parse_term, parse_type, Program};
pub use pretty::{pretty_branching, pretty_channel, pretty_pattern, pretty_term, pretty_type};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
}
