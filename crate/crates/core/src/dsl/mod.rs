//! A small language for equations of state `f(p, T, U, S, V, N, kB) = 0`.
//!
//! Expressions compile two ways. Classically, `p` and `T` are replaced by
//! `−∂U/∂V` and `∂U/∂S` of the fundamental equation, giving a PDE-of-state
//! residual. Quantized, they become `q·∂_V` and `−q·∂_S` acting on a
//! wavefunction, with the remaining factors placed according to an
//! operator ordering.

mod compile;
mod lexer;
mod parser;

use thiserror::Error;

use crate::jets::JetError;
use crate::potentials::ThermoError;

pub use compile::{
    compile_classical, compile_quantized, fold_constants, CompiledClassical, CompiledOperator,
    Ordering,
};
pub use lexer::{tokenize, Func, Sym, Token, TokenKind};
pub use parser::{parse_tokens, BinOp, Expr, ExprKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("unexpected character '{ch}' at offset {pos}")]
    Lex { pos: usize, ch: char },
    #[error("unknown identifier '{name}' at offset {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("malformed number '{text}' at offset {pos}")]
    BadNumber { pos: usize, text: String },
    #[error("syntax error at offset {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("not affine in (p, T) at offset {pos}: {reason}")]
    NotAffine { pos: usize, reason: String },
    #[error("non-constant exponent at offset {pos}")]
    NonConstantExponent { pos: usize },
    #[error("evaluation failed: {0}")]
    Eval(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

impl From<JetError> for DslError {
    fn from(e: JetError) -> Self {
        DslError::Eval(e.to_string())
    }
}

impl DslError {
    /// Source offset the error points at, if any.
    pub fn position(&self) -> Option<usize> {
        match self {
            DslError::Lex { pos, .. }
            | DslError::UnknownIdentifier { pos, .. }
            | DslError::BadNumber { pos, .. }
            | DslError::Syntax { pos, .. }
            | DslError::NotAffine { pos, .. }
            | DslError::NonConstantExponent { pos } => Some(*pos),
            _ => None,
        }
    }

    /// Lexing and parsing failures, as opposed to compilation or evaluation.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            DslError::Lex { .. }
                | DslError::UnknownIdentifier { .. }
                | DslError::BadNumber { .. }
                | DslError::Syntax { .. }
        )
    }
}

/// Tokenize and parse.
pub fn parse(text: &str) -> Result<Expr, DslError> {
    let tokens = tokenize(text)?;
    parse_tokens(&tokens, text.len())
}
