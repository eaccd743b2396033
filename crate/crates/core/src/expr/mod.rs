//! Arithmetic expressions over `x1..xm` with pointwise and interval
//! evaluation.
//!
//! Grammar (EBNF, see also `docs/grammar.md`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' uint)?
//! atom   := number | 'x' uint | '(' expr ')' | func '(' expr (',' expr)? ')'
//! func   := abs | min | max | sqrt | sin | cos | exp
//! ```
//!
//! Numbers are integers, decimals (optionally with an exponent) or `p/q`
//! rational literals. Interval evaluation encloses the range over the closed
//! box; because every node is evaluated independently, repeated variables
//! overestimate (`x1 - x1` over `[0,1]` gives `[-1,1]`).

mod ast;
mod eval;
mod parse;

pub use ast::{Constant, Expr};
pub use parse::parse;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("variable `{var}` exceeds dimension {dim}")]
    Dimension { var: String, dim: usize },
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: String },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}
