//! Checker diagnostics shared by all four type disciplines.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::env::EnvError;
use crate::syntax::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    TypeError,
    UnboundVariable,
    NotFound,
    SubsetViolation,
    LengthMismatch,
    OutputMismatch,
    LoopFrameNotInvariant,
    FreshnessViolation,
    MissingUnpack,
    WitnessMismatch,
    NoAxiom,
    NegationMismatch,
    MissingMotive,
    Unsupported,
    EigenEscape,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A rejected judgment: which rule failed, where, and why.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} ({rule}){}: {message}", span.map(|s| format!(" at {s}")).unwrap_or_default())]
pub struct CheckError {
    pub kind: ErrorKind,
    pub rule: &'static str,
    pub span: Option<Span>,
    pub message: String,
}

impl CheckError {
    pub fn new(kind: ErrorKind, rule: &'static str, message: impl Into<String>) -> Self {
        CheckError {
            kind,
            rule,
            span: None,
            message: message.into(),
        }
    }

    pub fn type_error(rule: &'static str, message: impl Into<String>) -> Self {
        CheckError::new(ErrorKind::TypeError, rule, message)
    }

    pub fn from_env(rule: &'static str, e: EnvError) -> Self {
        let kind = match e {
            EnvError::NotFound(_) => ErrorKind::NotFound,
            EnvError::SubsetViolation(_) => ErrorKind::SubsetViolation,
            EnvError::LengthMismatch { .. } => ErrorKind::LengthMismatch,
        };
        CheckError::new(kind, rule, e.to_string())
    }

    /// Attaches `span` unless a more precise one is already present.
    pub fn at(mut self, span: Option<Span>) -> Self {
        if self.span.is_none() {
            self.span = span;
        }
        self
    }
}

pub type CheckResult<T> = Result<T, CheckError>;
