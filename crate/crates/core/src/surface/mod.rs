//! Concrete ASCII syntax: lexer, recursive-descent parser and printer.

pub mod lexer;
pub mod parser;
pub mod printer;

use thiserror::Error;

pub use parser::{parse_file, parse_formula, parse_individual, parse_prop, parse_term};
pub use parser::{parse_expr, parse_output, parse_qenv, parse_seq};
pub use printer::{print_env, print_header, print_program,
    print_expr, print_file, print_formula, print_individual, print_output, print_prop,
    print_prototype, print_qenv, print_seq, print_term,
};

/// First parse error, with the set of tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: Vec<String>,
    pub found: String,
}
