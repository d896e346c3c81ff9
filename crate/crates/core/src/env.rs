//! Environment judgments over ordered identifier environments: lookup,
//! update, append, subset, restriction, split/zip, init and their
//! quantified counterparts.

use thiserror::Error;

use crate::binding::{alpha_eq, Binding};
use crate::syntax::{Env, Name, Output, Prop, QEnv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("identifier `{0}` is not bound")]
    NotFound(Name),
    #[error("binding for `{0}` is not contained in the environment")]
    SubsetViolation(Name),
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Rightmost binding of `x`.
pub fn lookup<'a, T>(env: &'a Env<T>, x: &str) -> Result<&'a T, EnvError> {
    env.0
        .iter()
        .rev()
        .find(|(y, _)| y == x)
        .map(|(_, t)| t)
        .ok_or_else(|| EnvError::NotFound(x.to_string()))
}

pub fn lookup_idents<T: Clone>(env: &Env<T>, xs: &[Name]) -> Result<Vec<T>, EnvError> {
    xs.iter().map(|x| lookup(env, x).cloned()).collect()
}

/// Rebinds the rightmost occurrence of `x`; never inserts.
pub fn update<T: Clone>(env: &Env<T>, x: &str, t: T) -> Result<Env<T>, EnvError> {
    let pos = env
        .0
        .iter()
        .rposition(|(y, _)| y == x)
        .ok_or_else(|| EnvError::NotFound(x.to_string()))?;
    let mut out = env.clone();
    out.0[pos].1 = t;
    Ok(out)
}

/// Folds [`update`] left over `bindings`.
pub fn multi_update<T: Clone>(env: &Env<T>, bindings: &Env<T>) -> Result<Env<T>, EnvError> {
    bindings
        .iter()
        .try_fold(env.clone(), |acc, (x, t)| update(&acc, x, t.clone()))
}

pub fn append<T: Clone>(a: &Env<T>, b: &Env<T>) -> Env<T> {
    Env(a.0.iter().chain(b.0.iter()).cloned().collect())
}

/// Every binding of `small` is the visible binding in `big`, up to alpha.
pub fn subset<T: Binding>(small: &Env<T>, big: &Env<T>) -> Result<(), EnvError> {
    for (x, t) in small.iter() {
        match lookup(big, x) {
            Ok(u) if alpha_eq(t, u) => {}
            _ => return Err(EnvError::SubsetViolation(x.clone())),
        }
    }
    Ok(())
}

/// Projects `env` onto `xs`, in the order of `xs`.
pub fn restrict<T: Clone>(env: &Env<T>, xs: &[Name]) -> Result<Env<T>, EnvError> {
    xs.iter()
        .map(|x| lookup(env, x).map(|t| (x.clone(), t.clone())))
        .collect()
}

pub fn split<T: Clone>(env: &Env<T>) -> (Vec<Name>, Vec<T>) {
    env.iter().cloned().unzip()
}

pub fn init<T: Clone>(xs: &[Name], t: T) -> Env<T> {
    xs.iter().map(|x| (x.clone(), t.clone())).collect()
}

pub fn zip<T: Clone>(xs: &[Name], ts: &[T]) -> Result<Env<T>, EnvError> {
    if xs.len() != ts.len() {
        return Err(EnvError::LengthMismatch {
            expected: xs.len(),
            found: ts.len(),
        });
    }
    Ok(xs.iter().cloned().zip(ts.iter().cloned()).collect())
}

/// Splits a quantified environment into its identifiers and the output type
/// carrying the same quantifier prefix.
pub fn qsplit(theta: &QEnv) -> (Vec<Name>, Output) {
    match theta {
        QEnv::Simple(env) => {
            let (xs, ts) = split(env);
            (xs, Output::Simple(ts))
        }
        QEnv::Exists(n, q) => {
            let (xs, out) = qsplit(q);
            (xs, Output::Exists(n.clone(), Box::new(out)))
        }
    }
}

pub fn qzip(xs: &[Name], out: &Output) -> Result<QEnv, EnvError> {
    match out {
        Output::Simple(ts) => zip(xs, ts).map(QEnv::Simple),
        Output::Exists(n, o) => Ok(QEnv::Exists(n.clone(), Box::new(qzip(xs, o)?))),
    }
}

/// Whether `x` is bound under the quantifiers of `theta`.
pub fn belongs(x: &str, theta: &QEnv) -> bool {
    match theta {
        QEnv::Simple(env) => lookup(env, x).is_ok(),
        QEnv::Exists(_, q) => belongs(x, q),
    }
}

pub fn notin(x: &str, theta: &QEnv) -> bool {
    !belongs(x, theta)
}

/// Shorthand for the I-side environments.
pub type PEnv = Env<Prop>;
