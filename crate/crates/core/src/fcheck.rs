//! Type checker for the functional language F, in its simple (FS) and
//! dependent (FD) disciplines. Both are syntax-directed synthesis.
//!
//! Formula equality is alpha-equivalence after two identifications:
//! `φ -> bot` is `~φ`, and the empty tuple `<>` is `top`.

use crate::arith::match_axiom;
use crate::binding::{alpha_eq, eigen_name, instantiate, Binding};
use crate::error::{CheckError, CheckResult, ErrorKind};
use crate::surface::print_formula;
use crate::syntax::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simple,
    Dependent,
}

/// Canonical representative used for formula comparison.
pub fn normalize(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Arrow(a, b) => match normalize(b) {
            Bottom => Formula::neg(normalize(a)),
            b => Formula::arrow(normalize(a), b),
        },
        Neg(a) => Formula::neg(normalize(a)),
        Forall(n, a) => Formula::forall(n.clone(), normalize(a)),
        Exists(n, a) => Formula::exists(n.clone(), normalize(a)),
        Tuple(fs) if fs.is_empty() => Top,
        Tuple(fs) => Tuple(fs.iter().map(normalize).collect()),
        other => other.clone(),
    }
}

pub fn formulas_equal(a: &Formula, b: &Formula) -> bool {
    alpha_eq(&normalize(a), &normalize(b))
}

pub struct FChecker {
    mode: Mode,
    /// Admit `pred(t) : nat(pred(i))` in the dependent discipline.
    pub pred_rule: bool,
    eigen_counter: usize,
    sigma: Vec<(Name, Formula)>,
    pub trace: Vec<&'static str>,
}

fn mismatch(rule: &'static str, expected: &Formula, found: &Formula) -> CheckError {
    CheckError::type_error(
        rule,
        format!(
            "expected `{}`, found `{}`",
            print_formula(expected),
            print_formula(found)
        ),
    )
}

impl FChecker {
    pub fn new(mode: Mode) -> Self {
        FChecker {
            mode,
            pred_rule: true,
            eigen_counter: 0,
            sigma: Vec::new(),
            trace: Vec::new(),
        }
    }

    fn rule(&mut self, r: &'static str) {
        self.trace.push(r);
    }

    fn dependent_only(&self, rule: &'static str, what: &str) -> CheckResult<()> {
        if self.mode == Mode::Simple {
            return Err(CheckError::type_error(
                rule,
                format!("{what} is outside the simple fragment"),
            ));
        }
        Ok(())
    }

    fn fresh_eigen(&mut self, base: &str) -> Name {
        self.eigen_counter += 1;
        eigen_name(base, self.eigen_counter)
    }

    fn nat_index(&self, rule: &'static str, f: &Formula) -> CheckResult<Option<Individual>> {
        match (self.mode, f) {
            (Mode::Simple, Formula::NatS) => Ok(None),
            (Mode::Dependent, Formula::Nat(i)) => Ok(Some(i.clone())),
            _ => Err(CheckError::type_error(
                rule,
                format!("expected a natural number, found `{}`", print_formula(f)),
            )),
        }
    }

    fn nat(&self, i: Option<Individual>) -> Formula {
        match i {
            Some(i) => Formula::Nat(i),
            None => Formula::NatS,
        }
    }

    /// Checks `t` under `sigma` and returns its synthesized formula.
    pub fn check(&mut self, sigma: &Env<Formula>, t: &Term) -> CheckResult<Formula> {
        let saved = std::mem::replace(&mut self.sigma, sigma.0.clone());
        let r = self.synth(t);
        self.sigma = saved;
        r
    }

    fn lookup(&self, x: &str) -> Option<&Formula> {
        self.sigma.iter().rev().find(|(y, _)| y == x).map(|(_, f)| f)
    }

    fn with_bindings<R>(
        &mut self,
        binds: impl IntoIterator<Item = (Name, Formula)>,
        f: impl FnOnce(&mut Self) -> R,
    ) -> R {
        let depth = self.sigma.len();
        self.sigma.extend(binds);
        let r = f(self);
        self.sigma.truncate(depth);
        r
    }

    fn synth(&mut self, t: &Term) -> CheckResult<Formula> {
        match t {
            Term::Var(x) => {
                self.rule("TC_VAR");
                self.lookup(x).cloned().ok_or_else(|| {
                    CheckError::new(
                        ErrorKind::UnboundVariable,
                        "TC_VAR",
                        format!("`{x}` is not bound"),
                    )
                })
            }
            Term::Zero => {
                self.rule("TC_ZERO");
                Ok(self.nat(match self.mode {
                    Mode::Simple => None,
                    Mode::Dependent => Some(Individual::Zero),
                }))
            }
            Term::Succ(a) => {
                self.rule("TC_SUCC");
                let f = self.synth(a)?;
                let i = self.nat_index("TC_SUCC", &f)?;
                Ok(self.nat(i.map(Individual::succ)))
            }
            Term::Pred(a) => {
                let rule = match self.mode {
                    Mode::Simple => "TC_PRED",
                    Mode::Dependent => "TC_PRED_D",
                };
                if self.mode == Mode::Dependent && !self.pred_rule {
                    return Err(CheckError::type_error(
                        rule,
                        "the dependent pred rule is disabled",
                    ));
                }
                self.rule(rule);
                let f = self.synth(a)?;
                let i = self.nat_index(rule, &f)?;
                Ok(self.nat(i.map(Individual::pred)))
            }
            Term::Fn(x, dom, body) => {
                self.rule("TC_LAM");
                self.well_formed("TC_LAM", dom)?;
                let cod = self.with_bindings([(x.clone(), dom.clone())], |c| c.synth(body))?;
                Ok(Formula::arrow(dom.clone(), cod))
            }
            Term::FnTuple(ps, body) => {
                self.rule("TC_LAM");
                self.rule("TC_PRODUCT");
                for (_, f) in ps {
                    self.well_formed("TC_LAM", f)?;
                }
                let cod = self.with_bindings(ps.iter().cloned(), |c| c.synth(body))?;
                let dom = Formula::Tuple(ps.iter().map(|(_, f)| f.clone()).collect());
                Ok(Formula::arrow(dom, cod))
            }
            Term::App(f, a) => {
                self.rule("TC_APP");
                let ft = normalize(&self.synth(f)?);
                let at = self.synth(a)?;
                let (dom, cod) = match ft {
                    Formula::Arrow(d, c) => (*d, *c),
                    Formula::Neg(d) => (*d, Formula::Bottom),
                    other => {
                        return Err(CheckError::type_error(
                            "TC_APP",
                            format!("applying a term of type `{}`", print_formula(&other)),
                        ))
                    }
                };
                if !formulas_equal(&dom, &at) {
                    return Err(mismatch("TC_APP", &dom, &at));
                }
                Ok(cod)
            }
            Term::IndLam(n, body) => {
                self.dependent_only("TC_FORALL_I", "individual abstraction")?;
                self.rule("TC_FORALL_I");
                let eigen = self.fresh_eigen(n);
                let opened = body.subst_ind(n, &Individual::var(&eigen));
                let f = self.synth(&opened)?;
                Ok(Formula::forall(
                    n.clone(),
                    f.subst_ind(&eigen, &Individual::var(n)),
                ))
            }
            Term::IndApp(f, i) => {
                self.dependent_only("TC_FORALL_E", "individual instantiation")?;
                self.rule("TC_FORALL_E");
                match self.synth(f)? {
                    Formula::Forall(n, body) => Ok(body.subst_ind(&n, i).as_ref().clone()),
                    other => Err(CheckError::type_error(
                        "TC_FORALL_E",
                        format!("instantiating a term of type `{}`", print_formula(&other)),
                    )),
                }
            }
            Term::Rec {
                bound,
                base,
                step,
                motive,
            } => self.rec(bound, base, step, motive.as_ref()),
            Term::Tuple(ts) => {
                self.rule("TC_TUPLE");
                let fs = ts
                    .iter()
                    .map(|t| self.synth(t))
                    .collect::<CheckResult<Vec<_>>>()?;
                Ok(Formula::Tuple(fs))
            }
            Term::Let(x, a, b) => {
                self.rule("TC_LET");
                let f = self.synth(a)?;
                self.with_bindings([(x.clone(), f)], |c| c.synth(b))
            }
            Term::LetMatch(xs, a, b) => {
                self.rule("TC_MATCH");
                let f = self.synth(a)?;
                self.extended(xs, &f, b)
            }
            Term::Pack(i, a, f) => {
                self.dependent_only("TC_EXISTS_I", "pack")?;
                self.rule("TC_EXISTS_I");
                let Formula::Exists(n, body) = f else {
                    return Err(CheckError::type_error(
                        "TC_EXISTS_I",
                        format!("pack annotation `{}` is not existential", print_formula(f)),
                    ));
                };
                let want = body.subst_ind(n, i);
                let got = self.synth(a)?;
                if !formulas_equal(&want, &got) {
                    return Err(mismatch("TC_EXISTS_I", &want, &got));
                }
                Ok(f.clone())
            }
            Term::Unpack(..) => Err(CheckError::type_error(
                "TC_EXISTS",
                "`?n.` only occurs as the body of a let over an existential",
            )),
            Term::Coerce(a, fam, proof) => {
                self.dependent_only("TC_EQUAL_E", "coercion")?;
                self.rule("TC_EQUAL_E");
                let pf = self.synth(proof)?;
                let Formula::Equals(i1, i2) = pf else {
                    return Err(CheckError::type_error(
                        "TC_EQUAL_E",
                        format!("coercion proof has type `{}`", print_formula(&pf)),
                    ));
                };
                let want = instantiate(fam, &i2);
                let got = self.synth(a)?;
                if !formulas_equal(&want, &got) {
                    return Err(mismatch("TC_EQUAL_E", &want, &got));
                }
                Ok(instantiate(fam, &i1))
            }
            Term::Axiom(i1, i2) => {
                self.dependent_only("TC_AX_I", "axiom term")?;
                if match_axiom(i1, i2).is_ok() {
                    self.rule("TC_AX_I");
                } else if match_axiom(i2, i1).is_ok() {
                    self.rule("TC_AX_II");
                } else {
                    return Err(CheckError::new(
                        ErrorKind::NoAxiom,
                        "TC_AX_I",
                        format!(
                            "no axiom schema proves `{}`",
                            print_formula(&Formula::Equals(i1.clone(), i2.clone()))
                        ),
                    ));
                }
                Ok(Formula::Equals(i1.clone(), i2.clone()))
            }
            Term::Callcc(a) => {
                self.dependent_only("TC_CALLCC", "callcc")?;
                self.rule("TC_CALLCC");
                let f = normalize(&self.synth(a)?);
                match f {
                    Formula::Arrow(d, c) if formulas_equal(&d, &Formula::neg((*c).clone())) => {
                        Ok(*c)
                    }
                    other => Err(CheckError::type_error(
                        "TC_CALLCC",
                        format!(
                            "callcc needs `~φ -> φ`, found `{}`",
                            print_formula(&other)
                        ),
                    )),
                }
            }
            Term::Throw(result, k, v) => {
                self.dependent_only("TC_THROW", "throw")?;
                self.rule("TC_THROW");
                let kt = normalize(&self.synth(k)?);
                let Formula::Neg(want) = kt else {
                    return Err(CheckError::type_error(
                        "TC_THROW",
                        format!("throwing to a term of type `{}`", print_formula(&kt)),
                    ));
                };
                let got = self.synth(v)?;
                if !formulas_equal(&want, &got) {
                    return Err(mismatch("TC_THROW", &want, &got));
                }
                Ok(result.clone())
            }
        }
    }

    fn well_formed(&self, rule: &'static str, f: &Formula) -> CheckResult<()> {
        if self.mode == Mode::Simple && !f.is_simple() {
            return Err(CheckError::type_error(
                rule,
                format!("`{}` is not a simple type", print_formula(f)),
            ));
        }
        Ok(())
    }

    fn rec(
        &mut self,
        bound: &Term,
        base: &Term,
        step: &Term,
        motive: Option<&Abs<Formula>>,
    ) -> CheckResult<Formula> {
        self.rule("TC_REC");
        let bt = self.synth(bound)?;
        let index = self.nat_index("TC_REC", &bt)?;
        let base_t = self.synth(base)?;
        let step_t = self.synth(step)?;
        match (self.mode, motive) {
            (Mode::Simple, Some(_)) => Err(CheckError::type_error(
                "TC_REC",
                "a simple recursor carries no motive",
            )),
            (Mode::Simple, None) => {
                let want = Formula::arrow(
                    Formula::NatS,
                    Formula::arrow(base_t.clone(), base_t.clone()),
                );
                if !formulas_equal(&want, &step_t) {
                    return Err(mismatch("TC_REC", &want, &step_t));
                }
                Ok(base_t)
            }
            (Mode::Dependent, None) => Err(CheckError::new(
                ErrorKind::MissingMotive,
                "TC_REC",
                "dependent recursion needs a motive `rec{n. φ}`",
            )),
            (Mode::Dependent, Some(m)) => {
                let want0 = instantiate(m, &Individual::Zero);
                if !formulas_equal(&want0, &base_t) {
                    return Err(mismatch("TC_REC", &want0, &base_t));
                }
                let Formula::Forall(k, step_body) = &step_t else {
                    return Err(CheckError::type_error(
                        "TC_REC",
                        format!(
                            "step must be `lam n. fn y : nat(n) => ...`, found type `{}`",
                            print_formula(&step_t)
                        ),
                    ));
                };
                let eigen = self.fresh_eigen(&m.binder);
                let nv = Individual::var(&eigen);
                let got = step_body.subst_ind(k, &nv);
                let want = Formula::arrow(
                    Formula::Nat(nv.clone()),
                    Formula::arrow(instantiate(m, &nv), instantiate(m, &Individual::succ(nv))),
                );
                if !formulas_equal(&want, &got) {
                    return Err(mismatch("TC_REC", &want, &got));
                }
                Ok(instantiate(m, &index.expect("dependent nat carries an index")))
            }
        }
    }

    /// `Σ, <x⃗> : φ ⊢ t`, through tuples and existentials.
    fn extended(&mut self, xs: &[Name], f: &Formula, t: &Term) -> CheckResult<Formula> {
        match (normalize(f), t) {
            (Formula::Exists(n, body), Term::Unpack(m, rest)) => {
                self.rule("TC_EXISTS");
                let eigen = self.fresh_eigen(&n);
                let iv = Individual::var(&eigen);
                let opened = body.subst_ind(&n, &iv);
                let rest = rest.subst_ind(m, &iv);
                let out = self.extended(xs, &opened, &rest)?;
                if out.free_ind().contains(&eigen) {
                    return Err(CheckError::new(
                        ErrorKind::EigenEscape,
                        "TC_EXISTS",
                        format!(
                            "witness `{m}` escapes into the result type `{}`",
                            print_formula(&out)
                        ),
                    ));
                }
                Ok(out)
            }
            (Formula::Exists(..), _) => Err(CheckError::type_error(
                "TC_EXISTS",
                "matching an existential needs `?n.` after `in`",
            )),
            (Formula::Tuple(fs), _) if fs.len() == xs.len() => {
                self.rule("TC_PRODUCT");
                let binds: Vec<_> = xs.iter().cloned().zip(fs).collect();
                self.with_bindings(binds, |c| c.synth(t))
            }
            (Formula::Top, _) if xs.is_empty() => {
                self.rule("TC_PRODUCT");
                self.synth(t)
            }
            (other, _) => Err(CheckError::type_error(
                "TC_PRODUCT",
                format!(
                    "cannot match <{}> against `{}`",
                    xs.join(", "),
                    print_formula(&other)
                ),
            )),
        }
    }
}

pub fn fs_check_term(sigma: &Env<Formula>, t: &Term) -> CheckResult<Formula> {
    FChecker::new(Mode::Simple).check(sigma, t)
}

pub fn fd_check_term(sigma: &Env<Formula>, t: &Term) -> CheckResult<Formula> {
    FChecker::new(Mode::Dependent).check(sigma, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_formula, parse_term};

    fn fs(src: &str) -> CheckResult<Formula> {
        fs_check_term(&Env::new(), &parse_term(src).unwrap())
    }

    fn fd(src: &str) -> CheckResult<Formula> {
        fd_check_term(&Env::new(), &parse_term(src).unwrap())
    }

    fn ty(src: &str) -> Formula {
        parse_formula(src).unwrap()
    }

    #[test]
    fn simple_examples() {
        assert_eq!(fs("fn x : nat => succ(x)").unwrap(), ty("nat -> nat"));
        assert_eq!(
            fs("rec(succ(0), 0, fn y : nat => fn a : nat => succ(a))").unwrap(),
            ty("nat")
        );
        assert!(fs("callcc (fn k : ~nat => 0)").is_err());
    }

    #[test]
    fn dependent_examples() {
        assert!(formulas_equal(
            &fd("callcc (fn k : ~nat(0) => 0)").unwrap(),
            &ty("nat(0)")
        ));
        assert!(formulas_equal(
            &fd("pack(0, 0 : exists n. nat(n))").unwrap(),
            &ty("exists n. nat(n)")
        ));
        let f = fd("lam n. fn x : nat(n) => x").unwrap();
        assert!(alpha_eq(&f, &ty("forall n. nat(n) -> nat(n)")));
        assert!(f.free_ind().is_empty());
    }

    #[test]
    fn coercion_along_axiom() {
        let sigma: Env<Formula> = [("z".to_string(), ty("nat(m)"))].into_iter().collect();
        let t = parse_term("z :> {i/nat(i)}[add(0, m) = m]").unwrap();
        let f = fd_check_term(&sigma, &t).unwrap();
        assert_eq!(f, ty("nat(add(0, m))"));
        let bad = parse_term("z :> {i/nat(i)}[add(0, m) = succ(m)]").unwrap();
        assert_eq!(
            fd_check_term(&sigma, &bad).unwrap_err().kind,
            ErrorKind::NoAxiom
        );
    }

    #[test]
    fn dependent_recursion() {
        let t = "lam n. fn x : nat(n) => rec{k. nat(k)}(x, 0, lam k. fn y : nat(k) => fn a : nat(k) => succ(a))";
        let f = fd(t).unwrap();
        assert!(alpha_eq(&f, &ty("forall n. nat(n) -> nat(n)")));
        let missing = "fn x : nat(0) => rec(x, 0, lam k. fn y : nat(k) => fn a : nat(k) => succ(a))";
        assert_eq!(fd(missing).unwrap_err().kind, ErrorKind::MissingMotive);
    }

    #[test]
    fn unpack_witness_may_not_escape() {
        let sigma: Env<Formula> = [("p".to_string(), ty("exists n. <nat(n)>"))]
            .into_iter()
            .collect();
        let ok = parse_term("let <x> = p in ?m. pack(m, x : exists k. nat(k))").unwrap();
        assert!(fd_check_term(&sigma, &ok).is_ok());
        let bad = parse_term("let <x> = p in ?m. x").unwrap();
        assert_eq!(
            fd_check_term(&sigma, &bad).unwrap_err().kind,
            ErrorKind::EigenEscape
        );
    }

    #[test]
    fn throw_discards_context() {
        let f = fd("callcc (fn k : ~nat(0) => succ(throw[nat(0)] k 0))");
        assert!(f.is_err(), "succ changes the index");
        let f = fd("callcc (fn k : ~nat(0) => throw[nat(0)] k 0)").unwrap();
        assert_eq!(f, ty("nat(0)"));
    }

    #[test]
    fn unit_is_empty_tuple() {
        assert!(formulas_equal(&ty("<>"), &ty("top")));
        assert!(formulas_equal(&ty("nat -> bot"), &ty("~nat")));
    }

    #[test]
    fn deterministic_trace() {
        let t = parse_term("fn (x : nat, y : nat) => let z = y in <z>").unwrap();
        let mut a = FChecker::new(Mode::Simple);
        let mut b = FChecker::new(Mode::Simple);
        a.check(&Env::new(), &t).unwrap();
        b.check(&Env::new(), &t).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(!a.trace.is_empty());
    }
}
