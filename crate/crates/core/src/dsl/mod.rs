//! Relation language: parse, print, evaluate, and solve.

mod ast;
mod eval;
mod format;
mod lexer;
mod parser;
mod solve;

use thiserror::Error;

pub use ast::{Decimal, Expr, RelOp, Relation, DEFAULT_TOL_DECADES, EXACT_REL_TOL};
pub use eval::{evaluate, infer_dimension, Env, Environment};
pub use format::format_expr;
pub use parser::{is_identifier, parse_expression, parse_relation};
pub use solve::{isolate, solve_for, Solution};

use crate::dimension::Dimension;
use crate::quantity::QuantityError;

/// Lexing or parsing failure with the byte offset of the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("lex error at byte {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lex { offset, .. } | ParseError::Syntax { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("dimension mismatch in `{expr}`: {left} vs {right}")]
    DimensionMismatch { expr: String, left: Dimension, right: Dimension },
    #[error("even root of a negative magnitude in `{expr}`")]
    NegativeBase { expr: String },
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("non-finite result in `{expr}`")]
    Overflow { expr: String },
    #[error("cannot isolate `{unknown}`: {reason}")]
    NotIsolatable { unknown: String, reason: String },
    #[error("{0}")]
    Quantity(QuantityError),
}

impl EvalError {
    pub(crate) fn from_quantity(err: QuantityError, at: &Expr) -> Self {
        let expr = at.to_string();
        match err {
            QuantityError::DimensionMismatch { left, right } => EvalError::DimensionMismatch { expr, left, right },
            QuantityError::NegativeBase(_) => EvalError::NegativeBase { expr },
            QuantityError::DivisionByZero => EvalError::DivisionByZero { expr },
            QuantityError::Overflow => EvalError::Overflow { expr },
            other => EvalError::Quantity(other),
        }
    }
}
