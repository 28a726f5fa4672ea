use std::fmt;

use thiserror::Error;

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        SyntaxError { line, col, msg: msg.into() }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for SyntaxError {}

/// Umbrella error for callers that mix modules (CLI, harness replay).
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Order(#[from] crate::order::OrderError),
    #[error(transparent)]
    Name(#[from] crate::names::NameError),
    #[error(transparent)]
    Formula(#[from] crate::semantics::FormulaError),
    #[error(transparent)]
    Bool(#[from] crate::boolcomp::BoolError),
    #[error(transparent)]
    Synth(#[from] crate::synth::SynthError),
    #[error(transparent)]
    Principle(#[from] crate::principles::PrincipleError),
    #[error(transparent)]
    Ultra(#[from] crate::ultrapower::UltraError),
    #[error(transparent)]
    Harness(#[from] crate::harness::HarnessError),
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
}
