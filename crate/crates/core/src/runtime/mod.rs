//! Execution: erasure, the continuation machine for F, and the reference
//! interpreter for jump-free I programs.

pub mod erase;
pub mod interp;
pub mod machine;

use thiserror::Error;

pub use erase::{erase, RTerm};
pub use interp::interpret_i;
pub use machine::{evaluate, PlainValue, DEFAULT_FUEL};

use crate::syntax::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { steps: u64 },
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("cannot erase: {0}")]
    NonErasable(String),
}

/// Erases a translated procedure and applies it to natural arguments.
pub fn run_procedure(t: &Term, args: &[u64], fuel: u64) -> Result<PlainValue, RuntimeError> {
    let f = erase(t)?;
    let arg = RTerm::Tuple(args.iter().map(|n| RTerm::num(*n)).collect());
    evaluate(&RTerm::app(f, arg), fuel)
}
