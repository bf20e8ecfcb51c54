//! A small line-oriented language for declaring scenarios.
//!
//! ```text
//! dim 2
//! state psi = ket[1, 1]          # normalized, with a warning
//! op path1 = outer(ket[1, 0], ket[1, 0])
//! op path2 = I2 - path1
//! pvm path = {path1, path2}
//! probe coh = outer(psi, psi)
//! query coh_path1 = cond(path1, coh)
//! ```
//!
//! Expressions combine numbers (`2`, `0.5i`, `i`, `pi`, `sqrt(2)`, `exp(x)`),
//! kets `ket[a, b, ...]`, the atoms `X`, `Y`, `Z`, `I n` / `In` and
//! `GM(d, k)`, names of earlier declarations, `conj(...)`, `outer(u, v)`,
//! `+`, `-`, `*`, `/` (by a scalar) and `⊗` (also spelled `kron`). A scalar
//! added to an operator stands for a multiple of the identity. The first
//! `state` is the initial state and must have the declared dimension; later
//! states are named kets of any dimension, usable in expressions.

mod ast;
mod elaborate;
mod lexer;
mod parser;

pub use ast::{BinOp, Decl, DeclKind, Expr, ExprKind, Func, Ident, ScenarioDoc, StateValue};
pub use elaborate::{elaborate, Elaborated};
pub use parser::parse;

use std::fmt;

/// Largest Hilbert-space dimension any expression may produce.
pub const MAX_DIM: usize = 64;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub col: usize,
    /// Byte offset into the source.
    pub offset: usize,
}

impl Pos {
    pub const START: Pos = Pos { line: 1, col: 1, offset: 0 };
}

/// Source range, end exclusive. Spans never take part in syntax-tree
/// equality, so a re-parsed pretty-printed tree compares equal to the
/// original.
#[derive(Copy, Clone, Debug, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, at: Pos) -> Self {
        Self { severity: Severity::Error, message: message.into(), line: at.line, col: at.col }
    }

    pub fn warning(message: impl Into<String>, at: Pos) -> Self {
        Self { severity: Severity::Warning, message: message.into(), line: at.line, col: at.col }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {severity}: {}", self.line, self.col, self.message)
    }
}

/// Parses and elaborates `text` in one step.
pub fn load(text: &str, name: &str) -> Result<Elaborated, Vec<Diagnostic>> {
    elaborate(&parse(text)?, name)
}

/// Source spans of every token except line ends, in order.
pub fn token_spans(text: &str) -> Vec<Span> {
    lexer::lex(text)
        .0
        .into_iter()
        .filter(|t| !matches!(t.tok, lexer::Tok::Newline | lexer::Tok::Eof))
        .map(|t| t.span)
        .collect()
}

#[cfg(test)]
mod tests;
