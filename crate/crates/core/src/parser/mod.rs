//! Readers for protocol specifications (`.gap`), predicate grammars
//! (`.grm`) and instance files (`.inst`), plus a printer for the same syntax.

mod diag;
mod expr;
mod grammar;
mod instance;
mod lexer;
mod printer;
mod spec;

pub use diag::{Diagnostic, ParseError};
pub use grammar::{parse_grammar, Grammar, Predicate, Template, DEFAULT_MAX_LITERALS};
pub use instance::parse_instance;
pub use printer::{print_expr, print_instance, print_lemma, print_system, print_type};
pub use spec::{parse_formula, parse_spec};
