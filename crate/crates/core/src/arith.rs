//! The nine axiom schemas as a one-step matcher, and the closed-term
//! evaluator used only by the runtime and test oracles.
//!
//! `mult` follows its printed axioms, so `mult(n, m) = (n + 1) * m`.
//! `sub` has no schema; it evaluates as truncated subtraction.

use std::fmt;

use thiserror::Error;

use crate::binding::alpha_eq;
use crate::syntax::Individual;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxiomSchema {
    Refl,
    Pred0,
    PredS,
    Add0,
    AddS,
    Mult0,
    MultS,
    F32Zero,
    F32Succ,
}

impl AxiomSchema {
    pub const ALL: [AxiomSchema; 9] = [
        AxiomSchema::Refl,
        AxiomSchema::Pred0,
        AxiomSchema::PredS,
        AxiomSchema::Add0,
        AxiomSchema::AddS,
        AxiomSchema::Mult0,
        AxiomSchema::MultS,
        AxiomSchema::F32Zero,
        AxiomSchema::F32Succ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomSchema::Refl => "AX_REFL",
            AxiomSchema::Pred0 => "AX_PRED_0",
            AxiomSchema::PredS => "AX_PRED_S",
            AxiomSchema::Add0 => "AX_ADD_0",
            AxiomSchema::AddS => "AX_ADD_S",
            AxiomSchema::Mult0 => "AX_MULT_0",
            AxiomSchema::MultS => "AX_MULT_S",
            AxiomSchema::F32Zero => "AX_F32_0",
            AxiomSchema::F32Succ => "AX_F32_S",
        }
    }

    /// The schema instantiated at the given schema variables (unused ones
    /// ignored). Used by tests to produce positive instances.
    pub fn instance(self, a: &Individual, b: &Individual) -> (Individual, Individual) {
        use Individual as I;
        let (a, b) = (a.clone(), b.clone());
        match self {
            AxiomSchema::Refl => (a.clone(), a),
            AxiomSchema::Pred0 => (I::pred(I::Zero), I::Zero),
            AxiomSchema::PredS => (I::pred(I::succ(a.clone())), a),
            AxiomSchema::Add0 => (I::add(I::Zero, b.clone()), b),
            AxiomSchema::AddS => (
                I::add(I::succ(a.clone()), b.clone()),
                I::succ(I::add(a, b)),
            ),
            AxiomSchema::Mult0 => (I::mult(I::Zero, b.clone()), b),
            AxiomSchema::MultS => (
                I::mult(I::succ(a.clone()), b.clone()),
                I::add(I::mult(a, b.clone()), b),
            ),
            AxiomSchema::F32Zero => (I::f32(I::Zero), I::num(3)),
            AxiomSchema::F32Succ => (I::f32(I::succ(a)), I::num(2)),
        }
    }
}

impl fmt::Display for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no axiom schema proves {0:?} = {1:?}")]
pub struct NoAxiom(pub Individual, pub Individual);

/// Which schema has `(i1, i2)` as an exact instance. No symmetry.
pub fn match_axiom(i1: &Individual, i2: &Individual) -> Result<AxiomSchema, NoAxiom> {
    use Individual as I;
    if alpha_eq(i1, i2) {
        return Ok(AxiomSchema::Refl);
    }
    let hit = match i1 {
        I::Pred(a) => match a.as_ref() {
            I::Zero if *i2 == I::Zero => Some(AxiomSchema::Pred0),
            I::Succ(x) if alpha_eq(x.as_ref(), i2) => Some(AxiomSchema::PredS),
            _ => None,
        },
        I::Add(a, b) => match (a.as_ref(), i2) {
            (I::Zero, _) if alpha_eq(b.as_ref(), i2) => Some(AxiomSchema::Add0),
            (I::Succ(x), I::Succ(r)) => match r.as_ref() {
                I::Add(x2, b2) if alpha_eq(x, x2) && alpha_eq(b, b2) => Some(AxiomSchema::AddS),
                _ => None,
            },
            _ => None,
        },
        I::Mult(a, b) => match (a.as_ref(), i2) {
            (I::Zero, _) if alpha_eq(b.as_ref(), i2) => Some(AxiomSchema::Mult0),
            (I::Succ(x), I::Add(m, b3)) => match m.as_ref() {
                I::Mult(x2, b2) if alpha_eq(x, x2) && alpha_eq(b, b2) && alpha_eq(b, b3) => {
                    Some(AxiomSchema::MultS)
                }
                _ => None,
            },
            _ => None,
        },
        I::F32(a) => match a.as_ref() {
            I::Zero if i2.as_numeral() == Some(3) => Some(AxiomSchema::F32Zero),
            I::Succ(_) if i2.as_numeral() == Some(2) => Some(AxiomSchema::F32Succ),
            _ => None,
        },
        _ => None,
    };
    hit.ok_or_else(|| NoAxiom(i1.clone(), i2.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("individual contains the variable `{0}`")]
    OpenIndividual(String),
    #[error("arithmetic overflow")]
    Overflow,
}

pub fn eval_individual(i: &Individual) -> Result<u64, EvalError> {
    use Individual as I;
    Ok(match i {
        I::Var(x) => return Err(EvalError::OpenIndividual(x.clone())),
        I::Zero => 0,
        I::Succ(a) => eval_individual(a)?
            .checked_add(1)
            .ok_or(EvalError::Overflow)?,
        I::Pred(a) => eval_individual(a)?.saturating_sub(1),
        I::Add(a, b) => eval_individual(a)?
            .checked_add(eval_individual(b)?)
            .ok_or(EvalError::Overflow)?,
        I::Sub(a, b) => eval_individual(a)?.saturating_sub(eval_individual(b)?),
        // mult(n, m) = (n + 1) * m under the two mult axioms.
        I::Mult(a, b) => {
            let (n, m) = (eval_individual(a)?, eval_individual(b)?);
            n.checked_add(1)
                .and_then(|n| n.checked_mul(m))
                .ok_or(EvalError::Overflow)?
        }
        I::F32(a) => {
            if eval_individual(a)? == 0 {
                3
            } else {
                2
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Individual as I;

    #[test]
    fn printed_examples() {
        assert_eq!(
            match_axiom(&I::pred(I::Zero), &I::Zero),
            Ok(AxiomSchema::Pred0)
        );
        let (l, m) = (I::var("l"), I::var("m"));
        assert_eq!(
            match_axiom(
                &I::add(I::succ(l.clone()), m.clone()),
                &I::succ(I::add(l, m))
            ),
            Ok(AxiomSchema::AddS)
        );
        assert_eq!(match_axiom(&I::f32(I::Zero), &I::num(3)), Ok(AxiomSchema::F32Zero));
        assert_eq!(
            match_axiom(&I::f32(I::succ(I::var("i"))), &I::num(2)),
            Ok(AxiomSchema::F32Succ)
        );
    }

    #[test]
    fn no_symmetry_in_matcher() {
        assert!(match_axiom(&I::Zero, &I::pred(I::Zero)).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_individual(&I::num(2)), Ok(2));
        assert_eq!(eval_individual(&I::f32(I::num(2))), Ok(2));
        assert_eq!(eval_individual(&I::mult(I::num(1), I::num(2))), Ok(4));
        assert_eq!(eval_individual(&I::pred(I::Zero)), Ok(0));
        assert!(matches!(
            eval_individual(&I::var("x")),
            Err(EvalError::OpenIndividual(_))
        ));
    }

    #[test]
    fn instances_match_their_schema() {
        let (a, b) = (I::var("a"), I::succ(I::var("b")));
        for s in AxiomSchema::ALL {
            let (l, r) = s.instance(&a, &b);
            assert_eq!(match_axiom(&l, &r), Ok(s), "{s}");
        }
    }
}
