//! Binding discipline: free individual variables, capture-avoiding
//! substitution of individuals (meta-application), alpha-equivalence and
//! eigenvariable opening.

use std::collections::BTreeSet;

use crate::syntax::*;

/// Paired renaming stacks used while comparing under binders.
#[derive(Debug, Default)]
pub struct Ren {
    ind: Vec<(Name, Name)>,
    term: Vec<(Name, Name)>,
}

fn same(stack: &[(Name, Name)], a: &str, b: &str) -> bool {
    for (l, r) in stack.iter().rev() {
        if l == a || r == b {
            return l == a && r == b;
        }
    }
    a == b
}

impl Ren {
    fn under_ind<R>(&mut self, a: &Name, b: &Name, f: impl FnOnce(&mut Ren) -> R) -> R {
        self.ind.push((a.clone(), b.clone()));
        let r = f(self);
        self.ind.pop();
        r
    }

    fn under_terms<R>(
        &mut self,
        pairs: impl IntoIterator<Item = (Name, Name)>,
        f: impl FnOnce(&mut Ren) -> R,
    ) -> R {
        let depth = self.term.len();
        self.term.extend(pairs);
        let r = f(self);
        self.term.truncate(depth);
        r
    }
}

/// Syntax categories that admit meta-application.
pub trait Binding: Clone {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>);

    /// Capture-avoiding substitution of `by` for the individual variable `x`.
    fn subst_ind(&self, x: &str, by: &Individual) -> Self;

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool;

    fn free_ind(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_ind_into(&mut Vec::new(), &mut out);
        out
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq<T: Binding>(a: &T, b: &T) -> bool {
    a.alpha(b, &mut Ren::default())
}

/// A name built from `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "n" } else { stem };
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|cand| !avoid.contains(cand))
        .expect("unbounded supply of names")
}

/// Eigenvariables carry a `'`, which the surface lexer never produces.
pub fn is_eigen(name: &str) -> bool {
    name.contains('\'')
}

pub fn eigen_name(base: &str, k: usize) -> Name {
    let stem = base.split('\'').next().unwrap_or("n");
    format!("{stem}'{k}")
}

/// Instantiates a one-binder node: `{n/X}[i]`.
pub fn instantiate<T: Binding>(abs: &Abs<T>, i: &Individual) -> T {
    abs.body.subst_ind(&abs.binder, i)
}

/// Opens `{n/X}` with an eigenvariable fresh for `avoid` (and for the free
/// variables of the body).
pub fn open_with_eigen<T: Binding>(abs: &Abs<T>, avoid: &BTreeSet<Name>) -> (Name, T) {
    let mut all = avoid.clone();
    all.extend(abs.body.free_ind());
    let eigen = (1..)
        .map(|k| eigen_name(&abs.binder, k))
        .find(|cand| !all.contains(cand))
        .expect("unbounded supply of names");
    let opened = instantiate(abs, &Individual::Var(eigen.clone()));
    (eigen, opened)
}

fn subst_binder<T: Binding>(n: &Name, body: &T, x: &str, by: &Individual) -> (Name, T) {
    if n == x {
        return (n.clone(), body.clone());
    }
    let by_fv = by.free_ind();
    if by_fv.contains(n) {
        let body_fv = body.free_ind();
        if body_fv.contains(x) {
            let mut avoid = by_fv;
            avoid.extend(body_fv);
            avoid.insert(x.to_string());
            let fresh = fresh_name(n, &avoid);
            let renamed = body.subst_ind(n, &Individual::Var(fresh.clone()));
            return (fresh, renamed.subst_ind(x, by));
        }
    }
    (n.clone(), body.subst_ind(x, by))
}

fn free_under<T: Binding>(n: &Name, body: &T, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    bound.push(n.clone());
    body.free_ind_into(bound, out);
    bound.pop();
}

impl<T: Binding> Binding for Box<T> {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        (**self).free_ind_into(bound, out)
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        Box::new((**self).subst_ind(x, by))
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        (**self).alpha(other, ren)
    }
}

impl<T: Binding> Binding for Vec<T> {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        for t in self {
            t.free_ind_into(bound, out);
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        self.iter().map(|t| t.subst_ind(x, by)).collect()
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.alpha(b, ren))
    }
}

impl<A: Binding, B: Binding> Binding for (A, B) {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        self.0.free_ind_into(bound, out);
        self.1.free_ind_into(bound, out);
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        (self.0.subst_ind(x, by), self.1.subst_ind(x, by))
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        self.0.alpha(&other.0, ren) && self.1.alpha(&other.1, ren)
    }
}

impl<T: Binding> Binding for Abs<T> {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        free_under(&self.binder, &self.body, bound, out)
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        let (binder, body) = subst_binder(&self.binder, &self.body, x, by);
        Abs { binder, body }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        ren.under_ind(&self.binder, &other.binder, |ren| {
            self.body.alpha(&other.body, ren)
        })
    }
}

impl Binding for Individual {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Individual::*;
        match self {
            Var(n) => {
                if !bound.contains(n) {
                    out.insert(n.clone());
                }
            }
            Zero => {}
            Succ(i) | Pred(i) | F32(i) => i.free_ind_into(bound, out),
            Add(a, b) | Sub(a, b) | Mult(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        use Individual::*;
        match self {
            Var(n) if n == x => by.clone(),
            Var(_) | Zero => self.clone(),
            Succ(i) => Succ(i.subst_ind(x, by)),
            Pred(i) => Pred(i.subst_ind(x, by)),
            F32(i) => F32(i.subst_ind(x, by)),
            Add(a, b) => Add(a.subst_ind(x, by), b.subst_ind(x, by)),
            Sub(a, b) => Sub(a.subst_ind(x, by), b.subst_ind(x, by)),
            Mult(a, b) => Mult(a.subst_ind(x, by), b.subst_ind(x, by)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        use Individual::*;
        match (self, other) {
            (Var(a), Var(b)) => same(&ren.ind, a, b),
            (Zero, Zero) => true,
            (Succ(a), Succ(b)) | (Pred(a), Pred(b)) | (F32(a), F32(b)) => a.alpha(b, ren),
            (Add(a1, a2), Add(b1, b2))
            | (Sub(a1, a2), Sub(b1, b2))
            | (Mult(a1, a2), Mult(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            _ => false,
        }
    }
}

impl Binding for Formula {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Formula::*;
        match self {
            PropVar(_) | Top | Bottom | NatS => {}
            Nat(i) => i.free_ind_into(bound, out),
            Equals(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            Arrow(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            Neg(a) => a.free_ind_into(bound, out),
            Forall(n, a) | Exists(n, a) => free_under(n, a, bound, out),
            Tuple(fs) => fs.free_ind_into(bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        use Formula::*;
        match self {
            PropVar(_) | Top | Bottom | NatS => self.clone(),
            Nat(i) => Nat(i.subst_ind(x, by)),
            Equals(a, b) => Equals(a.subst_ind(x, by), b.subst_ind(x, by)),
            Arrow(a, b) => Arrow(a.subst_ind(x, by), b.subst_ind(x, by)),
            Neg(a) => Neg(a.subst_ind(x, by)),
            Forall(n, a) => {
                let (n, a) = subst_binder(n, a, x, by);
                Forall(n, a)
            }
            Exists(n, a) => {
                let (n, a) = subst_binder(n, a, x, by);
                Exists(n, a)
            }
            Tuple(fs) => Tuple(fs.subst_ind(x, by)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        use Formula::*;
        match (self, other) {
            (PropVar(a), PropVar(b)) => a == b,
            (Top, Top) | (Bottom, Bottom) | (NatS, NatS) => true,
            (Nat(a), Nat(b)) => a.alpha(b, ren),
            (Equals(a1, a2), Equals(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Arrow(a1, a2), Arrow(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Neg(a), Neg(b)) => a.alpha(b, ren),
            (Forall(n, a), Forall(m, b)) | (Exists(n, a), Exists(m, b)) => {
                ren.under_ind(n, m, |ren| a.alpha(b, ren))
            }
            (Tuple(a), Tuple(b)) => a.alpha(b, ren),
            _ => false,
        }
    }
}

impl Binding for Prop {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Prop::*;
        match self {
            Var(_) | Top | Bottom | NatS => {}
            Nat(i) => i.free_ind_into(bound, out),
            Equals(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            Proc(rho) => rho.free_ind_into(bound, out),
            Neg(ps) => ps.free_ind_into(bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        use Prop::*;
        match self {
            Var(_) | Top | Bottom | NatS => self.clone(),
            Nat(i) => Nat(i.subst_ind(x, by)),
            Equals(a, b) => Equals(a.subst_ind(x, by), b.subst_ind(x, by)),
            Proc(rho) => Proc(rho.subst_ind(x, by)),
            Neg(ps) => Neg(ps.subst_ind(x, by)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        use Prop::*;
        match (self, other) {
            (Var(a), Var(b)) => a == b,
            (Top, Top) | (Bottom, Bottom) | (NatS, NatS) => true,
            (Nat(a), Nat(b)) => a.alpha(b, ren),
            (Equals(a1, a2), Equals(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Proc(a), Proc(b)) => a.alpha(b, ren),
            (Neg(a), Neg(b)) => a.alpha(b, ren),
            _ => false,
        }
    }
}

impl Binding for Output {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Output::Simple(ps) => ps.free_ind_into(bound, out),
            Output::Exists(n, o) => free_under(n, o, bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Output::Simple(ps) => Output::Simple(ps.subst_ind(x, by)),
            Output::Exists(n, o) => {
                let (n, o) = subst_binder(n, o, x, by);
                Output::Exists(n, o)
            }
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (Output::Simple(a), Output::Simple(b)) => a.alpha(b, ren),
            (Output::Exists(n, a), Output::Exists(m, b)) => {
                ren.under_ind(n, m, |ren| a.alpha(b, ren))
            }
            _ => false,
        }
    }
}

impl Binding for Prototype {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Prototype::Sig(ps, o) => {
                ps.free_ind_into(bound, out);
                o.free_ind_into(bound, out);
            }
            Prototype::Forall(n, r) => free_under(n, r, bound, out),
            Prototype::Neg(ps) => ps.free_ind_into(bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Prototype::Sig(ps, o) => Prototype::Sig(ps.subst_ind(x, by), o.subst_ind(x, by)),
            Prototype::Forall(n, r) => {
                let (n, r) = subst_binder(n, r, x, by);
                Prototype::Forall(n, r)
            }
            Prototype::Neg(ps) => Prototype::Neg(ps.subst_ind(x, by)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (Prototype::Sig(a, o), Prototype::Sig(b, p)) => a.alpha(b, ren) && o.alpha(p, ren),
            (Prototype::Forall(n, a), Prototype::Forall(m, b)) => {
                ren.under_ind(n, m, |ren| a.alpha(b, ren))
            }
            (Prototype::Neg(a), Prototype::Neg(b)) => a.alpha(b, ren),
            _ => false,
        }
    }
}

impl<T: Binding> Binding for Env<T> {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        for (_, t) in &self.0 {
            t.free_ind_into(bound, out);
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        Env(self
            .0
            .iter()
            .map(|(n, t)| (n.clone(), t.subst_ind(x, by)))
            .collect())
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|((x, a), (y, b))| x == y && a.alpha(b, ren))
    }
}

impl Binding for QEnv {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            QEnv::Simple(env) => env.free_ind_into(bound, out),
            QEnv::Exists(n, q) => free_under(n, q, bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            QEnv::Simple(env) => QEnv::Simple(env.subst_ind(x, by)),
            QEnv::Exists(n, q) => {
                let (n, q) = subst_binder(n, q, x, by);
                QEnv::Exists(n, q)
            }
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (QEnv::Simple(a), QEnv::Simple(b)) => a.alpha(b, ren),
            (QEnv::Exists(n, a), QEnv::Exists(m, b)) => ren.under_ind(n, m, |ren| a.alpha(b, ren)),
            _ => false,
        }
    }
}

impl Binding for Term {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Term::*;
        match self {
            Var(_) | Zero => {}
            Succ(t) | Pred(t) | Callcc(t) => t.free_ind_into(bound, out),
            Fn(_, f, t) => {
                f.free_ind_into(bound, out);
                t.free_ind_into(bound, out);
            }
            FnTuple(params, t) => {
                for (_, f) in params {
                    f.free_ind_into(bound, out);
                }
                t.free_ind_into(bound, out);
            }
            App(a, b) | Let(_, a, b) | LetMatch(_, a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            IndLam(n, t) | Unpack(n, t) => free_under(n, t, bound, out),
            IndApp(t, i) => {
                t.free_ind_into(bound, out);
                i.free_ind_into(bound, out);
            }
            Rec {
                bound: b,
                base,
                step,
                motive,
            } => {
                b.free_ind_into(bound, out);
                base.free_ind_into(bound, out);
                step.free_ind_into(bound, out);
                if let Some(m) = motive {
                    m.free_ind_into(bound, out);
                }
            }
            Tuple(ts) => ts.free_ind_into(bound, out),
            Pack(i, t, f) => {
                i.free_ind_into(bound, out);
                t.free_ind_into(bound, out);
                f.free_ind_into(bound, out);
            }
            Coerce(t, fam, e) => {
                t.free_ind_into(bound, out);
                fam.free_ind_into(bound, out);
                e.free_ind_into(bound, out);
            }
            Axiom(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            Throw(f, a, b) => {
                f.free_ind_into(bound, out);
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        use Term::*;
        let s = |t: &Term| Box::new(t.subst_ind(x, by));
        match self {
            Var(_) | Zero => self.clone(),
            Succ(t) => Succ(s(t)),
            Pred(t) => Pred(s(t)),
            Callcc(t) => Callcc(s(t)),
            Fn(v, f, t) => Fn(v.clone(), f.subst_ind(x, by), s(t)),
            FnTuple(params, t) => FnTuple(
                params
                    .iter()
                    .map(|(v, f)| (v.clone(), f.subst_ind(x, by)))
                    .collect(),
                s(t),
            ),
            App(a, b) => App(s(a), s(b)),
            Let(v, a, b) => Let(v.clone(), s(a), s(b)),
            LetMatch(vs, a, b) => LetMatch(vs.clone(), s(a), s(b)),
            IndLam(n, t) => {
                let (n, t) = subst_binder(n, t, x, by);
                IndLam(n, t)
            }
            Unpack(n, t) => {
                let (n, t) = subst_binder(n, t, x, by);
                Unpack(n, t)
            }
            IndApp(t, i) => IndApp(s(t), i.subst_ind(x, by)),
            Rec {
                bound,
                base,
                step,
                motive,
            } => Rec {
                bound: s(bound),
                base: s(base),
                step: s(step),
                motive: motive.as_ref().map(|m| m.subst_ind(x, by)),
            },
            Tuple(ts) => Tuple(ts.subst_ind(x, by)),
            Pack(i, t, f) => Pack(i.subst_ind(x, by), s(t), f.subst_ind(x, by)),
            Coerce(t, fam, e) => Coerce(s(t), fam.subst_ind(x, by), s(e)),
            Axiom(a, b) => Axiom(a.subst_ind(x, by), b.subst_ind(x, by)),
            Throw(f, a, b) => Throw(f.subst_ind(x, by), s(a), s(b)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        use Term::*;
        match (self, other) {
            (Var(a), Var(b)) => same(&ren.term, a, b),
            (Zero, Zero) => true,
            (Succ(a), Succ(b)) | (Pred(a), Pred(b)) | (Callcc(a), Callcc(b)) => a.alpha(b, ren),
            (Fn(x, f, a), Fn(y, g, b)) => {
                f.alpha(g, ren) && ren.under_terms([(x.clone(), y.clone())], |ren| a.alpha(b, ren))
            }
            (FnTuple(ps, a), FnTuple(qs, b)) => {
                ps.len() == qs.len()
                    && ps.iter().zip(qs).all(|((_, f), (_, g))| f.alpha(g, ren))
                    && ren.under_terms(
                        ps.iter().zip(qs).map(|((x, _), (y, _))| (x.clone(), y.clone())),
                        |ren| a.alpha(b, ren),
                    )
            }
            (App(a1, a2), App(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Let(x, a1, a2), Let(y, b1, b2)) => {
                a1.alpha(b1, ren)
                    && ren.under_terms([(x.clone(), y.clone())], |ren| a2.alpha(b2, ren))
            }
            (LetMatch(xs, a1, a2), LetMatch(ys, b1, b2)) => {
                xs.len() == ys.len()
                    && a1.alpha(b1, ren)
                    && ren.under_terms(xs.iter().cloned().zip(ys.iter().cloned()), |ren| {
                        a2.alpha(b2, ren)
                    })
            }
            (IndLam(n, a), IndLam(m, b)) | (Unpack(n, a), Unpack(m, b)) => {
                ren.under_ind(n, m, |ren| a.alpha(b, ren))
            }
            (IndApp(a, i), IndApp(b, j)) => a.alpha(b, ren) && i.alpha(j, ren),
            (
                Rec {
                    bound: a1,
                    base: a2,
                    step: a3,
                    motive: am,
                },
                Rec {
                    bound: b1,
                    base: b2,
                    step: b3,
                    motive: bm,
                },
            ) => {
                a1.alpha(b1, ren)
                    && a2.alpha(b2, ren)
                    && a3.alpha(b3, ren)
                    && match (am, bm) {
                        (None, None) => true,
                        (Some(m1), Some(m2)) => m1.alpha(m2, ren),
                        _ => false,
                    }
            }
            (Tuple(a), Tuple(b)) => a.alpha(b, ren),
            (Pack(i, a, f), Pack(j, b, g)) => i.alpha(j, ren) && a.alpha(b, ren) && f.alpha(g, ren),
            (Coerce(a, f, a2), Coerce(b, g, b2)) => {
                a.alpha(b, ren) && f.alpha(g, ren) && a2.alpha(b2, ren)
            }
            (Axiom(a1, a2), Axiom(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Throw(f, a1, a2), Throw(g, b1, b2)) => {
                f.alpha(g, ren) && a1.alpha(b1, ren) && a2.alpha(b2, ren)
            }
            _ => false,
        }
    }
}

impl Binding for Expr {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(_) | Expr::Star | Expr::Num(_) => {}
            Expr::Inst(e, i) => {
                e.free_ind_into(bound, out);
                i.free_ind_into(bound, out);
            }
            Expr::ContInst(e, fam, i) => {
                e.free_ind_into(bound, out);
                fam.free_ind_into(bound, out);
                i.free_ind_into(bound, out);
            }
            Expr::Coerce(e, fam, e2) => {
                e.free_ind_into(bound, out);
                fam.free_ind_into(bound, out);
                e2.free_ind_into(bound, out);
            }
            Expr::Axiom(a, b) => {
                a.free_ind_into(bound, out);
                b.free_ind_into(bound, out);
            }
            Expr::Proc(h) => h.free_ind_into(bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Expr::Var(_) | Expr::Star | Expr::Num(_) => self.clone(),
            Expr::Inst(e, i) => Expr::Inst(e.subst_ind(x, by), i.subst_ind(x, by)),
            Expr::ContInst(e, fam, i) => Expr::ContInst(
                e.subst_ind(x, by),
                fam.subst_ind(x, by),
                i.subst_ind(x, by),
            ),
            Expr::Coerce(e, fam, e2) => {
                Expr::Coerce(e.subst_ind(x, by), fam.subst_ind(x, by), e2.subst_ind(x, by))
            }
            Expr::Axiom(a, b) => Expr::Axiom(a.subst_ind(x, by), b.subst_ind(x, by)),
            Expr::Proc(h) => Expr::Proc(h.subst_ind(x, by)),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Star, Expr::Star) => true,
            (Expr::Num(a), Expr::Num(b)) => a == b,
            (Expr::Inst(a, i), Expr::Inst(b, j)) => a.alpha(b, ren) && i.alpha(j, ren),
            (Expr::ContInst(a, f, i), Expr::ContInst(b, g, j)) => {
                a.alpha(b, ren) && f.alpha(g, ren) && i.alpha(j, ren)
            }
            (Expr::Coerce(a, f, a2), Expr::Coerce(b, g, b2)) => {
                a.alpha(b, ren) && f.alpha(g, ren) && a2.alpha(b2, ren)
            }
            (Expr::Axiom(a1, a2), Expr::Axiom(b1, b2)) => a1.alpha(b1, ren) && a2.alpha(b2, ren),
            (Expr::Proc(a), Expr::Proc(b)) => a.alpha(b, ren),
            _ => false,
        }
    }
}

impl Binding for Header {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Header::Params { params, out: o, body } => {
                params.free_ind_into(bound, out);
                o.free_ind_into(bound, out);
                body.free_ind_into(bound, out);
            }
            Header::Forall(n, h) => free_under(n, h, bound, out),
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Header::Params { params, out, body } => Header::Params {
                params: params.subst_ind(x, by),
                out: out.subst_ind(x, by),
                body: body.subst_ind(x, by),
            },
            Header::Forall(n, h) => {
                let (n, h) = subst_binder(n, h, x, by);
                Header::Forall(n, h)
            }
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (
                Header::Params {
                    params: p1,
                    out: o1,
                    body: b1,
                },
                Header::Params {
                    params: p2,
                    out: o2,
                    body: b2,
                },
            ) => p1.alpha(p2, ren) && o1.alpha(o2, ren) && b1.alpha(b2, ren),
            (Header::Forall(n, a), Header::Forall(m, b)) => {
                ren.under_ind(n, m, |ren| a.alpha(b, ren))
            }
            _ => false,
        }
    }
}

impl Binding for Command {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Command::Block(s, q) => {
                s.free_ind_into(bound, out);
                q.free_ind_into(bound, out);
            }
            Command::For(l) => {
                l.bound.free_ind_into(bound, out);
                let inner = (l.body.clone(), l.frame.clone());
                match &l.index {
                    Some(n) => free_under(n, &inner, bound, out),
                    None => inner.free_ind_into(bound, out),
                }
            }
            Command::Assign(_, e) => e.free_ind_into(bound, out),
            Command::Inc(_) | Command::Dec(_) => {}
            Command::Call { callee, args, .. } => {
                callee.free_ind_into(bound, out);
                args.free_ind_into(bound, out);
            }
            Command::Jump {
                target,
                args,
                annot,
            } => {
                target.free_ind_into(bound, out);
                args.free_ind_into(bound, out);
                annot.free_ind_into(bound, out);
            }
            Command::Label { body, annot, .. } => {
                body.free_ind_into(bound, out);
                annot.free_ind_into(bound, out);
            }
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Command::Block(s, q) => Command::Block(s.subst_ind(x, by), q.subst_ind(x, by)),
            Command::For(l) => {
                let inner = (l.body.clone(), l.frame.clone());
                let (index, (body, frame)) = match &l.index {
                    Some(n) => {
                        let (n, inner) = subst_binder(n, &inner, x, by);
                        (Some(n), inner)
                    }
                    None => (None, inner.subst_ind(x, by)),
                };
                Command::For(Box::new(ForLoop {
                    var: l.var.clone(),
                    index,
                    bound: l.bound.subst_ind(x, by),
                    body,
                    frame,
                }))
            }
            Command::Assign(y, e) => Command::Assign(y.clone(), e.subst_ind(x, by)),
            Command::Inc(_) | Command::Dec(_) => self.clone(),
            Command::Call { callee, args, outs } => Command::Call {
                callee: callee.subst_ind(x, by),
                args: args.subst_ind(x, by),
                outs: outs.clone(),
            },
            Command::Jump {
                target,
                args,
                annot,
            } => Command::Jump {
                target: target.subst_ind(x, by),
                args: args.subst_ind(x, by),
                annot: annot.subst_ind(x, by),
            },
            Command::Label { name, body, annot } => Command::Label {
                name: name.clone(),
                body: body.subst_ind(x, by),
                annot: annot.subst_ind(x, by),
            },
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (Command::Block(s1, q1), Command::Block(s2, q2)) => {
                s1.alpha(s2, ren) && q1.alpha(q2, ren)
            }
            (Command::For(a), Command::For(b)) => {
                if a.var != b.var || !a.bound.alpha(&b.bound, ren) {
                    return false;
                }
                let ia = (a.body.clone(), a.frame.clone());
                let ib = (b.body.clone(), b.frame.clone());
                match (&a.index, &b.index) {
                    (Some(n), Some(m)) => ren.under_ind(n, m, |ren| ia.alpha(&ib, ren)),
                    (None, None) => ia.alpha(&ib, ren),
                    _ => false,
                }
            }
            (Command::Assign(x, e), Command::Assign(y, f)) => x == y && e.alpha(f, ren),
            (Command::Inc(x), Command::Inc(y)) | (Command::Dec(x), Command::Dec(y)) => x == y,
            (
                Command::Call {
                    callee: c1,
                    args: a1,
                    outs: o1,
                },
                Command::Call {
                    callee: c2,
                    args: a2,
                    outs: o2,
                },
            ) => o1 == o2 && c1.alpha(c2, ren) && a1.alpha(a2, ren),
            (
                Command::Jump {
                    target: t1,
                    args: a1,
                    annot: q1,
                },
                Command::Jump {
                    target: t2,
                    args: a2,
                    annot: q2,
                },
            ) => t1.alpha(t2, ren) && a1.alpha(a2, ren) && q1.alpha(q2, ren),
            (
                Command::Label {
                    name: n1,
                    body: b1,
                    annot: q1,
                },
                Command::Label {
                    name: n2,
                    body: b2,
                    annot: q2,
                },
            ) => n1 == n2 && b1.alpha(b2, ren) && q1.alpha(q2, ren),
            _ => false,
        }
    }
}

impl Binding for Seq {
    fn free_ind_into(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Seq::Empty => {}
            Seq::Cmd(_, c, s) => {
                c.free_ind_into(bound, out);
                s.free_ind_into(bound, out);
            }
            Seq::Cst(_, _, e, s) | Seq::Var(_, _, e, s) => {
                e.free_ind_into(bound, out);
                s.free_ind_into(bound, out);
            }
            Seq::Unpack(n, s) => free_under(n, s, bound, out),
            Seq::Witness(_, i, q, s) => {
                i.free_ind_into(bound, out);
                q.free_ind_into(bound, out);
                s.free_ind_into(bound, out);
            }
            Seq::Subst(_, s, fam, e) => {
                s.free_ind_into(bound, out);
                fam.free_ind_into(bound, out);
                e.free_ind_into(bound, out);
            }
        }
    }

    fn subst_ind(&self, x: &str, by: &Individual) -> Self {
        match self {
            Seq::Empty => Seq::Empty,
            Seq::Cmd(sp, c, s) => Seq::Cmd(*sp, c.subst_ind(x, by), s.subst_ind(x, by)),
            Seq::Cst(sp, y, e, s) => Seq::Cst(*sp, y.clone(), e.subst_ind(x, by), s.subst_ind(x, by)),
            Seq::Var(sp, y, e, s) => Seq::Var(*sp, y.clone(), e.subst_ind(x, by), s.subst_ind(x, by)),
            Seq::Unpack(n, s) => {
                let (n, s) = subst_binder(n, s, x, by);
                Seq::Unpack(n, s)
            }
            Seq::Witness(sp, i, q, s) => Seq::Witness(
                *sp,
                i.subst_ind(x, by),
                q.subst_ind(x, by),
                s.subst_ind(x, by),
            ),
            Seq::Subst(sp, s, fam, e) => Seq::Subst(
                *sp,
                s.subst_ind(x, by),
                fam.subst_ind(x, by),
                e.subst_ind(x, by),
            ),
        }
    }

    fn alpha(&self, other: &Self, ren: &mut Ren) -> bool {
        match (self, other) {
            (Seq::Empty, Seq::Empty) => true,
            (Seq::Cmd(_, c1, s1), Seq::Cmd(_, c2, s2)) => c1.alpha(c2, ren) && s1.alpha(s2, ren),
            (Seq::Cst(_, x, e1, s1), Seq::Cst(_, y, e2, s2))
            | (Seq::Var(_, x, e1, s1), Seq::Var(_, y, e2, s2)) => {
                x == y && e1.alpha(e2, ren) && s1.alpha(s2, ren)
            }
            (Seq::Unpack(n, a), Seq::Unpack(m, b)) => ren.under_ind(n, m, |ren| a.alpha(b, ren)),
            (Seq::Witness(_, i, q1, s1), Seq::Witness(_, j, q2, s2)) => {
                i.alpha(j, ren) && q1.alpha(q2, ren) && s1.alpha(s2, ren)
            }
            (Seq::Subst(_, s1, f1, e1), Seq::Subst(_, s2, f2, e2)) => {
                s1.alpha(s2, ren) && f1.alpha(f2, ren) && e1.alpha(e2, ren)
            }
            _ => false,
        }
    }
}

/// Free term variables of an F term.
pub fn free_term_vars(t: &Term) -> BTreeSet<Name> {
    fn go(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        use Term::*;
        match t {
            Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Zero | Axiom(..) => {}
            Succ(a) | Pred(a) | Callcc(a) | IndLam(_, a) | Unpack(_, a) | IndApp(a, _) => {
                go(a, bound, out)
            }
            Pack(_, a, _) => go(a, bound, out),
            Fn(x, _, a) => {
                bound.push(x.clone());
                go(a, bound, out);
                bound.pop();
            }
            FnTuple(ps, a) => {
                let d = bound.len();
                bound.extend(ps.iter().map(|(x, _)| x.clone()));
                go(a, bound, out);
                bound.truncate(d);
            }
            App(a, b) | Coerce(a, _, b) | Throw(_, a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Let(x, a, b) => {
                go(a, bound, out);
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            LetMatch(xs, a, b) => {
                go(a, bound, out);
                let d = bound.len();
                bound.extend(xs.iter().cloned());
                go(b, bound, out);
                bound.truncate(d);
            }
            Rec {
                bound: b,
                base,
                step,
                ..
            } => {
                go(b, bound, out);
                go(base, bound, out);
                go(step, bound, out);
            }
            Tuple(ts) => {
                for t in ts {
                    go(t, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat_var(n: &str) -> Formula {
        Formula::Nat(Individual::var(n))
    }

    #[test]
    fn reflexive_alpha() {
        let f = Formula::nat(Individual::Zero);
        assert!(alpha_eq(&f, &f));
    }

    #[test]
    fn renamed_binder_is_alpha_equal() {
        let a = Formula::forall("n", nat_var("n"));
        let b = Formula::forall("m", nat_var("m"));
        assert!(alpha_eq(&a, &b));
        let c = Formula::forall("m", nat_var("n"));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn no_arithmetic_in_alpha() {
        let a = Formula::nat(Individual::add(Individual::Zero, Individual::var("m")));
        let b = nat_var("m");
        assert!(!alpha_eq(&a, &b));
    }

    #[test]
    fn subst_direct_and_shadowed() {
        let fam = Abs::new("n", nat_var("n"));
        assert_eq!(instantiate(&fam, &Individual::Zero), Formula::nat(Individual::Zero));
        let shadow = Abs::new("n", Formula::exists("n", nat_var("n")));
        assert_eq!(
            instantiate(&shadow, &Individual::num(1)),
            Formula::exists("n", nat_var("n"))
        );
    }

    #[test]
    fn subst_renames_capturing_binder() {
        // {n/ ∀m nat(add(n,m))} applied to m must not capture.
        let body = Formula::forall(
            "m",
            Formula::nat(Individual::add(Individual::var("n"), Individual::var("m"))),
        );
        let out = instantiate(&Abs::new("n", body), &Individual::var("m"));
        let expected = Formula::forall(
            "k",
            Formula::nat(Individual::add(Individual::var("m"), Individual::var("k"))),
        );
        assert!(alpha_eq(&out, &expected), "{out:?}");
        assert!(out.free_ind().contains("m"));
    }

    #[test]
    fn open_is_fresh_and_deterministic() {
        let fam = Abs::new("n", nat_var("n"));
        let avoid: BTreeSet<Name> = ["n".to_string()].into();
        let (e1, b1) = open_with_eigen(&fam, &avoid);
        let (e2, b2) = open_with_eigen(&fam, &avoid);
        assert!(!avoid.contains(&e1));
        assert!(is_eigen(&e1));
        assert_eq!(e1, e2);
        assert!(alpha_eq(&b1, &b2));
        assert_eq!(b1, Formula::Nat(Individual::Var(e1)));
    }

    #[test]
    fn term_alpha_renames_term_binders() {
        let a = Term::Fn("x".into(), Formula::NatS, Box::new(Term::var("x")));
        let b = Term::Fn("y".into(), Formula::NatS, Box::new(Term::var("y")));
        assert!(alpha_eq(&a, &b));
        let c = Term::Fn("y".into(), Formula::NatS, Box::new(Term::var("x")));
        assert!(!alpha_eq(&a, &c));
    }
}
