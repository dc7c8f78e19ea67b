//! Goal-directed answer set engine and heart-failure treatment advisor.

pub mod abduction;
pub mod cli;
pub mod ground;
pub mod kb;
pub mod model;
pub mod number;
pub mod parser;
pub mod patterns;
pub mod service;
pub mod solver;

pub use model::{Atom, BodyElement, Literal, PredicateKey, Program, Rule, Term};
pub use parser::{parse_literal, parse_program, parse_query, print_program, ParseError, Query};
