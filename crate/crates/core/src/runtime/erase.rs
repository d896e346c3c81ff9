//! Erasure of the specificational layer: individuals, packs, coercions and
//! axiom terms disappear, leaving System T with continuations.

use std::fmt;

use crate::syntax::{Name, Term};

use super::RuntimeError;

/// Runnable terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RTerm {
    Var(Name),
    Zero,
    Succ(Box<RTerm>),
    Pred(Box<RTerm>),
    Fn(Name, Box<RTerm>),
    FnTuple(Vec<Name>, Box<RTerm>),
    App(Box<RTerm>, Box<RTerm>),
    Rec(Box<RTerm>, Box<RTerm>, Box<RTerm>),
    Tuple(Vec<RTerm>),
    Let(Name, Box<RTerm>, Box<RTerm>),
    LetMatch(Vec<Name>, Box<RTerm>, Box<RTerm>),
    Callcc(Box<RTerm>),
    Throw(Box<RTerm>, Box<RTerm>),
}

impl RTerm {
    pub fn app(f: RTerm, a: RTerm) -> Self {
        RTerm::App(Box::new(f), Box::new(a))
    }

    pub fn num(n: u64) -> Self {
        (0..n).fold(RTerm::Zero, |acc, _| RTerm::Succ(Box::new(acc)))
    }
}

impl fmt::Display for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RTerm::Var(x) => write!(f, "{x}"),
            RTerm::Zero => write!(f, "0"),
            RTerm::Succ(a) => write!(f, "succ({a})"),
            RTerm::Pred(a) => write!(f, "pred({a})"),
            RTerm::Fn(x, b) => write!(f, "(fn {x} => {b})"),
            RTerm::FnTuple(xs, b) => write!(f, "(fn ({}) => {b})", xs.join(", ")),
            RTerm::App(a, b) => write!(f, "({a} {b})"),
            RTerm::Rec(a, b, c) => write!(f, "rec({a}, {b}, {c})"),
            RTerm::Tuple(ts) => {
                write!(f, "<")?;
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ">")
            }
            RTerm::Let(x, a, b) => write!(f, "(let {x} = {a} in {b})"),
            RTerm::LetMatch(xs, a, b) => write!(f, "(let <{}> = {a} in {b})", xs.join(", ")),
            RTerm::Callcc(a) => write!(f, "(callcc {a})"),
            RTerm::Throw(a, b) => write!(f, "(throw {a} {b})"),
        }
    }
}

/// Drops everything the checker needed but evaluation does not.
pub fn erase(t: &Term) -> Result<RTerm, RuntimeError> {
    let b = |t: &Term| erase(t).map(Box::new);
    Ok(match t {
        Term::Var(x) => RTerm::Var(x.clone()),
        Term::Zero => RTerm::Zero,
        Term::Succ(a) => RTerm::Succ(b(a)?),
        Term::Pred(a) => RTerm::Pred(b(a)?),
        Term::Fn(x, _, body) => RTerm::Fn(x.clone(), b(body)?),
        Term::FnTuple(ps, body) => {
            RTerm::FnTuple(ps.iter().map(|(x, _)| x.clone()).collect(), b(body)?)
        }
        Term::App(f, a) => RTerm::App(b(f)?, b(a)?),
        Term::IndLam(_, body) => erase(body)?,
        Term::IndApp(f, _) => erase(f)?,
        Term::Rec {
            bound, base, step, ..
        } => RTerm::Rec(b(bound)?, b(base)?, b(step)?),
        Term::Tuple(ts) => RTerm::Tuple(ts.iter().map(erase).collect::<Result<_, _>>()?),
        Term::Let(x, a, body) => RTerm::Let(x.clone(), b(a)?, b(body)?),
        Term::LetMatch(xs, a, body) => RTerm::LetMatch(xs.clone(), b(a)?, b(body)?),
        Term::Pack(_, a, _) => erase(a)?,
        Term::Unpack(_, a) => erase(a)?,
        Term::Coerce(a, _, _) => erase(a)?,
        Term::Axiom(i1, i2) => {
            return Err(RuntimeError::NonErasable(format!(
                "axiom term `{}` outside a coercion",
                crate::surface::print_formula(&crate::syntax::Formula::Equals(
                    i1.clone(),
                    i2.clone()
                ))
            )))
        }
        Term::Callcc(a) => RTerm::Callcc(b(a)?),
        Term::Throw(_, k, v) => RTerm::Throw(b(k)?, b(v)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_term;

    #[test]
    fn specificational_layer_disappears() {
        let t = parse_term("pack(0, 0 : exists n. nat(n))").unwrap();
        assert_eq!(erase(&t).unwrap(), RTerm::Zero);
        let t = parse_term("lam n. fn x : nat(n) => x").unwrap();
        assert_eq!(
            erase(&t).unwrap(),
            RTerm::Fn("x".into(), Box::new(RTerm::Var("x".into())))
        );
        let t = parse_term("(0 = 0)").unwrap();
        assert!(matches!(erase(&t), Err(RuntimeError::NonErasable(_))));
    }
}
