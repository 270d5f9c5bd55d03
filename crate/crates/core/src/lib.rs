//! A workbench for the strictly higher-order pi-calculus and its process- and
//! name-parameterized extensions: syntax, transitions, bounded equivalence
//! checking, triggers and factorization.

pub mod casebook;
pub mod equiv;
pub mod error;
pub mod gen;
pub mod par;
pub mod parse;
pub mod print;
pub mod semantics;
pub mod sort;
pub mod syntax;
pub mod transforms;

pub use error::{Error, ParseError, SortError};
pub use parse::{load_defs, parse_defs, parse_term, parse_term_with, DefEnv, ParseOptions};
pub use print::{print_term, print_term_elaborated};
pub use syntax::{CalcId, Name, Sort, Sym, Term};
