//! Certifying toolchain for an imperative LOOP language with higher-order
//! procedure variables and non-local jumps.
//!
//! Programs are checked in a simple or a dependent discipline, translated
//! by state passing into System T with first-class continuations, re-checked
//! on the functional side and run on an environment machine.

pub mod arith;
pub mod binding;
pub mod dependent;
pub mod env;
pub mod error;
pub mod fcheck;
pub mod fuzz;
pub mod pipeline;
pub mod gen;
pub mod runtime;
pub mod simple;
pub mod surface;
pub mod syntax;
