//! The dependently typed half: checking I programs with quantified
//! environments, labels and jumps (ID), defined negation, and the
//! translation into F re-checked by [`fd_check_term`].
//!
//! Sequences are checked against an expected quantified environment that
//! flows down from procedure, block, label and jump annotations.

use std::cell::Cell;
use std::collections::BTreeSet;

use crate::arith::match_axiom;
use crate::binding::{alpha_eq, eigen_name, instantiate, Binding};
use crate::env::{self, PEnv};
use crate::error::{CheckError, CheckResult, ErrorKind};
use crate::simple::init_unassigned;
use crate::surface::{print_env, print_prop, print_qenv};
use crate::syntax::*;

pub use crate::fcheck::fd_check_term;

// ---------------------------------------------------------------------------
// Type translation

pub fn translate_prop(p: &Prop) -> Formula {
    match p {
        Prop::Var(x) => Formula::PropVar(x.clone()),
        Prop::Top => Formula::Top,
        Prop::Bottom => Formula::Bottom,
        Prop::NatS => Formula::NatS,
        Prop::Nat(i) => Formula::Nat(i.clone()),
        Prop::Equals(a, b) => Formula::Equals(a.clone(), b.clone()),
        Prop::Proc(rho) => translate_prototype(rho),
        Prop::Neg(ps) => Formula::neg(Formula::Tuple(translate_props(ps))),
    }
}

pub fn translate_props(ps: &[Prop]) -> Vec<Formula> {
    ps.iter().map(translate_prop).collect()
}

/// `([ψ⃗] out φ)★ = <ψ⃗★> -> φ★`, `(∀n ρ)★ = ∀n ρ★`. A universal chain
/// ending in a negation is the negation of an existential output and
/// translates to `~∃n…<ψ⃗★>`.
pub fn translate_prototype(rho: &Prototype) -> Formula {
    match negative_chain(rho) {
        Some((binders, ps)) => Formula::neg(
            binders
                .into_iter()
                .rev()
                .fold(Formula::Tuple(translate_props(ps)), |acc, n| {
                    Formula::exists(n.clone(), acc)
                }),
        ),
        None => match rho {
            Prototype::Sig(ps, out) => {
                Formula::arrow(Formula::Tuple(translate_props(ps)), translate_output(out))
            }
            Prototype::Forall(n, r) => Formula::forall(n.clone(), translate_prototype(r)),
            Prototype::Neg(_) => unreachable!("handled as a negative chain"),
        },
    }
}

/// Binders and payload of `∀n1…∀nk ~(ψ⃗)`.
fn negative_chain(rho: &Prototype) -> Option<(Vec<&Name>, &[Prop])> {
    let mut binders = Vec::new();
    let mut r = rho;
    loop {
        match r {
            Prototype::Forall(n, inner) => {
                binders.push(n);
                r = inner;
            }
            Prototype::Neg(ps) => return Some((binders, ps)),
            Prototype::Sig(..) => return None,
        }
    }
}

pub fn translate_output(out: &Output) -> Formula {
    match out {
        Output::Simple(ps) => Formula::Tuple(translate_props(ps)),
        Output::Exists(n, o) => Formula::exists(n.clone(), translate_output(o)),
    }
}

pub fn translate_env(env: &PEnv) -> (Vec<Name>, Vec<Formula>) {
    env.iter().map(|(x, p)| (x.clone(), translate_prop(p))).unzip()
}

/// `(Θ)★ = <x⃗> : φ`.
pub fn translate_qenv(theta: &QEnv) -> (Vec<Name>, Formula) {
    let (xs, out) = env::qsplit(theta);
    (xs, translate_output(&out))
}

/// Defined negation of an output type.
pub fn neg_output(out: &Output) -> Prop {
    out.negation()
}

// ---------------------------------------------------------------------------
// Checking

/// Checker state for one ID run.
#[derive(Default)]
pub struct IdChecker {
    pub trace: Vec<&'static str>,
    pub warnings: Vec<String>,
    eigen_counter: usize,
}

fn prop_mismatch(rule: &'static str, want: &Prop, got: &Prop) -> CheckError {
    CheckError::type_error(
        rule,
        format!("expected `{}`, found `{}`", print_prop(want), print_prop(got)),
    )
}

fn expect_prop(rule: &'static str, want: &Prop, got: &Prop) -> CheckResult<()> {
    if alpha_eq(want, got) {
        Ok(())
    } else {
        Err(prop_mismatch(rule, want, got))
    }
}

fn env_err(rule: &'static str) -> impl Fn(env::EnvError) -> CheckError {
    move |e| CheckError::from_env(rule, e)
}

fn distinct(rule: &'static str, xs: &[Name]) -> CheckResult<()> {
    let mut seen = BTreeSet::new();
    for x in xs {
        if !seen.insert(x) {
            return Err(CheckError::type_error(
                rule,
                format!("identifier `{x}` occurs twice"),
            ));
        }
    }
    Ok(())
}

fn nat_index(rule: &'static str, p: &Prop) -> CheckResult<Individual> {
    match p {
        Prop::Nat(i) => Ok(i.clone()),
        other => Err(CheckError::type_error(
            rule,
            format!("expected `nat(i)`, found `{}`", print_prop(other)),
        )),
    }
}

impl IdChecker {
    pub fn new() -> Self {
        Self::default()
    }

    fn rule(&mut self, r: &'static str) {
        self.trace.push(r);
    }

    fn fresh_eigen(&mut self, base: &str) -> Name {
        self.eigen_counter += 1;
        eigen_name(base, self.eigen_counter)
    }

    /// `Γ; Ω ⊢ e : ψ`.
    pub fn check_expr(&mut self, gamma: &PEnv, omega: &PEnv, e: &Expr) -> CheckResult<Prop> {
        match e {
            Expr::Var(x) => {
                if let Ok(t) = env::lookup(omega, x) {
                    if env::lookup(gamma, x).is_ok() {
                        self.warnings
                            .push(format!("store variable `{x}` shadows a constant"));
                    }
                    self.rule("T_ENV_II");
                    return Ok(t.clone());
                }
                self.rule("T_ENV_I");
                env::lookup(gamma, x).cloned().map_err(|_| {
                    CheckError::new(
                        ErrorKind::UnboundVariable,
                        "T_ENV_I",
                        format!("`{x}` is not bound"),
                    )
                })
            }
            Expr::Star => {
                self.rule("T_TRUE");
                Ok(Prop::Top)
            }
            Expr::Num(n) => {
                self.rule("T_ZERO");
                for _ in 0..*n {
                    self.rule("T_SUCC");
                }
                Ok(Prop::Nat(Individual::num(*n)))
            }
            Expr::Axiom(i1, i2) => {
                if match_axiom(i1, i2).is_ok() {
                    self.rule("T_AX_I");
                } else if match_axiom(i2, i1).is_ok() {
                    self.rule("T_AX_II");
                } else {
                    return Err(CheckError::new(
                        ErrorKind::NoAxiom,
                        "T_AX_I",
                        format!(
                            "no axiom schema proves `{}`",
                            print_prop(&Prop::Equals(i1.clone(), i2.clone()))
                        ),
                    ));
                }
                Ok(Prop::Equals(i1.clone(), i2.clone()))
            }
            Expr::Coerce(inner, fam, proof) => {
                self.rule("T_EQUAL_E");
                let (i1, i2) = self.equation("T_EQUAL_E", gamma, omega, proof)?;
                let got = self.check_expr(gamma, omega, inner)?;
                expect_prop("T_EQUAL_E", &instantiate(fam, &i2), &got)?;
                Ok(instantiate(fam, &i1))
            }
            Expr::Inst(inner, i) => {
                self.rule("T_PROC_INST");
                let t = self.check_expr(gamma, omega, inner)?;
                match &t {
                    Prop::Proc(rho) => match rho.as_ref() {
                        Prototype::Forall(..) if negative_chain(rho).is_some() => {
                            Err(CheckError::new(
                                ErrorKind::NegationMismatch,
                                "T_PROC_INST",
                                format!(
                                    "`{}` is a continuation; instantiate it with `<:`",
                                    print_prop(&t)
                                ),
                            ))
                        }
                        Prototype::Forall(n, body) => Ok(Prop::proc(body.as_ref().subst_ind(n, i))),
                        _ => Err(CheckError::type_error(
                            "T_PROC_INST",
                            format!("instantiating a non-generic `{}`", print_prop(&t)),
                        )),
                    },
                    other => Err(CheckError::type_error(
                        "T_PROC_INST",
                        format!("instantiating a value of type `{}`", print_prop(other)),
                    )),
                }
            }
            Expr::ContInst(inner, fam, i) => {
                self.rule("T_CONT_INST");
                let want = neg_output(&Output::Exists(
                    fam.binder.clone(),
                    Box::new(fam.body.clone()),
                ));
                let got = self.check_expr(gamma, omega, inner)?;
                if !alpha_eq(&want, &got) {
                    return Err(CheckError::new(
                        ErrorKind::NegationMismatch,
                        "T_CONT_INST",
                        format!(
                            "expected the continuation type `{}`, found `{}`",
                            print_prop(&want),
                            print_prop(&got)
                        ),
                    ));
                }
                Ok(neg_output(&instantiate(fam, i)))
            }
            Expr::Proc(h) => self.check_header(gamma, h),
        }
    }

    fn equation(
        &mut self,
        rule: &'static str,
        gamma: &PEnv,
        omega: &PEnv,
        proof: &Expr,
    ) -> CheckResult<(Individual, Individual)> {
        match self.check_expr(gamma, omega, proof)? {
            Prop::Equals(a, b) => Ok((a, b)),
            other => Err(CheckError::type_error(
                rule,
                format!("coercion proof has type `{}`", print_prop(&other)),
            )),
        }
    }

    fn check_header(&mut self, gamma: &PEnv, h: &Header) -> CheckResult<Prop> {
        match h {
            Header::Forall(n, inner) => {
                self.rule("T_PROC_ABS");
                let eigen = self.fresh_eigen(n);
                let opened = inner.subst_ind(n, &Individual::var(&eigen));
                let rho = match self.check_header(gamma, &opened)? {
                    Prop::Proc(rho) => *rho,
                    _ => unreachable!("headers have procedure types"),
                };
                let closed = rho.subst_ind(&eigen, &Individual::var(n));
                Ok(Prop::Proc(Box::new(Prototype::Forall(
                    n.clone(),
                    Box::new(closed),
                ))))
            }
            Header::Params { params, out, body } => {
                self.rule("T_PROC_DECL");
                let (zs, phi) = env::qsplit(out);
                distinct("T_PROC_DECL", &zs)?;
                let gamma2 = env::append(gamma, params);
                let start = env::init(&zs, Prop::Top);
                self.check_seq(&gamma2, &start, body, out)?;
                let (_, rhos) = env::split(params);
                Ok(Prop::Proc(Box::new(Prototype::Sig(rhos, phi))))
            }
        }
    }

    fn check_exprs(&mut self, gamma: &PEnv, omega: &PEnv, es: &[Expr]) -> CheckResult<Vec<Prop>> {
        self.rule("T_EXPS_I");
        es.iter()
            .map(|e| {
                self.rule("T_EXPS_II");
                self.check_expr(gamma, omega, e)
            })
            .collect()
    }

    fn check_args(
        &mut self,
        rule: &'static str,
        gamma: &PEnv,
        omega: &PEnv,
        want: &[Prop],
        args: &[Expr],
    ) -> CheckResult<()> {
        let got = self.check_exprs(gamma, omega, args)?;
        if got.len() != want.len() {
            return Err(CheckError::new(
                ErrorKind::LengthMismatch,
                rule,
                format!("expected {} arguments, found {}", want.len(), got.len()),
            ));
        }
        for (w, g) in want.iter().zip(&got) {
            expect_prop(rule, w, g)?;
        }
        Ok(())
    }

    /// `Γ; Ω ⊢ s ▷ Θ`.
    pub fn check_seq(&mut self, gamma: &PEnv, omega: &PEnv, s: &Seq, theta: &QEnv) -> CheckResult<()> {
        let span = s.span();
        self.seq(gamma, omega, s, theta).map_err(|e| e.at(span))
    }

    fn seq(&mut self, gamma: &PEnv, omega: &PEnv, s: &Seq, theta: &QEnv) -> CheckResult<()> {
        match s {
            Seq::Empty => {
                self.rule("T_EMPTY");
                match theta {
                    QEnv::Simple(expected) => {
                        env::subset(expected, omega).map_err(|e| {
                            let mut err = CheckError::from_env("T_EMPTY", e);
                            err.message = format!(
                                "{}; final store [{}] does not provide [{}]",
                                err.message,
                                print_env(omega),
                                print_env(expected)
                            );
                            err
                        })
                    }
                    QEnv::Exists(..) => Err(CheckError::new(
                        ErrorKind::WitnessMismatch,
                        "T_EMPTY",
                        format!(
                            "sequence ends against `{}` without a witness `[i in ...]`",
                            print_qenv(theta)
                        ),
                    )),
                }
            }
            Seq::Witness(_, i, annot, rest) => {
                self.rule("T_WITNESS");
                if !alpha_eq(annot, theta) {
                    return Err(CheckError::new(
                        ErrorKind::WitnessMismatch,
                        "T_WITNESS",
                        format!(
                            "witness annotation `{}` does not match the expected `{}`",
                            print_qenv(annot),
                            print_qenv(theta)
                        ),
                    ));
                }
                let QEnv::Exists(n, body) = annot else {
                    return Err(CheckError::new(
                        ErrorKind::WitnessMismatch,
                        "T_WITNESS",
                        "a witness needs an existential environment",
                    ));
                };
                self.check_seq(gamma, omega, rest, &body.subst_ind(n, i))
            }
            Seq::Subst(_, inner, fam, proof) => {
                self.rule("T_SUBST");
                let (i1, i2) = self.equation("T_SUBST", gamma, omega, proof)?;
                let want = instantiate(fam, &i1);
                if !alpha_eq(&want, theta) {
                    return Err(CheckError::type_error(
                        "T_SUBST",
                        format!(
                            "coercion yields `{}`, expected `{}`",
                            print_qenv(&want),
                            print_qenv(theta)
                        ),
                    ));
                }
                self.check_seq(gamma, omega, inner, &instantiate(fam, &i2))
            }
            Seq::Cst(_, y, e, rest) => {
                self.rule("T_CST");
                let t = self.check_expr(gamma, omega, e)?;
                let mut gamma2 = gamma.clone();
                gamma2.push(y.clone(), t);
                self.check_seq(&gamma2, omega, rest, theta)
            }
            Seq::Var(_, y, e, rest) => {
                self.rule("T_VAR");
                if env::belongs(y, theta) {
                    return Err(CheckError::new(
                        ErrorKind::FreshnessViolation,
                        "T_VAR",
                        format!("local `{y}` also occurs in the expected outputs"),
                    ));
                }
                let t = self.check_expr(gamma, omega, e)?;
                let mut omega2 = omega.clone();
                omega2.push(y.clone(), t);
                self.check_seq(gamma, &omega2, rest, theta)
            }
            Seq::Unpack(..) => Err(CheckError::type_error(
                "TC_UPDATE_SEQ_II",
                "`?n.` only follows a command with an existential result",
            )),
            Seq::Cmd(_, c, rest) => self.command(gamma, omega, c, rest, theta),
        }
    }

    /// `Γ; Ω⟦Θ'⟧ ⊢ s ▷ Θ`.
    fn update_seq(
        &mut self,
        gamma: &PEnv,
        omega: &PEnv,
        update: &QEnv,
        s: &Seq,
        theta: &QEnv,
    ) -> CheckResult<()> {
        match update {
            QEnv::Simple(binds) => {
                self.rule("TC_UPDATE_SEQ_I");
                let omega2 = env::multi_update(omega, binds).map_err(env_err("TC_UPDATE_SEQ_I"))?;
                self.check_seq(gamma, &omega2, s, theta)
            }
            QEnv::Exists(n, inner) => {
                self.rule("TC_UPDATE_SEQ_II");
                let Seq::Unpack(m, rest) = s else {
                    return Err(CheckError::new(
                        ErrorKind::MissingUnpack,
                        "TC_UPDATE_SEQ_II",
                        format!(
                            "the result `{}` is existential; continue with `?{n}.`",
                            print_qenv(update)
                        ),
                    )
                    .at(s.span()));
                };
                let eigen = self.fresh_eigen(m);
                let iv = Individual::var(&eigen);
                let opened = inner.subst_ind(n, &iv);
                let rest = rest.subst_ind(m, &iv);
                self.update_seq(gamma, omega, &opened, &rest, theta)
            }
        }
    }

    fn command(
        &mut self,
        gamma: &PEnv,
        omega: &PEnv,
        c: &Command,
        rest: &Seq,
        theta: &QEnv,
    ) -> CheckResult<()> {
        match c {
            Command::Block(body, annot) => {
                self.rule("T_BLOCK");
                self.check_seq(gamma, omega, body, annot)?;
                self.update_seq(gamma, omega, annot, rest, theta)
            }
            Command::Label { name, body, annot } => {
                self.rule("T_LABEL");
                let (_, phi) = env::qsplit(annot);
                let mut gamma2 = gamma.clone();
                gamma2.push(name.clone(), neg_output(&phi));
                self.check_seq(&gamma2, omega, body, annot)?;
                self.update_seq(gamma, omega, annot, rest, theta)
            }
            Command::Jump {
                target,
                args,
                annot,
            } => {
                self.rule("T_JUMP");
                let t = self.check_expr(gamma, omega, target)?;
                let Prop::Neg(ps) = &t else {
                    return Err(CheckError::new(
                        ErrorKind::NegationMismatch,
                        "T_JUMP",
                        format!("jumping to a value of type `{}`", print_prop(&t)),
                    ));
                };
                self.check_args("T_JUMP", gamma, omega, ps, args)?;
                distinct("T_JUMP", &annot.idents())?;
                self.update_seq(gamma, omega, annot, rest, theta)
            }
            Command::Inc(y) | Command::Dec(y) => {
                let (rule, step): (&'static str, fn(Individual) -> Individual) =
                    if matches!(c, Command::Inc(_)) {
                        ("T_INC", Individual::succ)
                    } else {
                        ("T_DEC", Individual::pred)
                    };
                self.rule(rule);
                let t = env::lookup(omega, y).map_err(env_err(rule))?;
                let i = nat_index(rule, t)?;
                let omega2 = env::update(omega, y, Prop::Nat(step(i))).map_err(env_err(rule))?;
                self.check_seq(gamma, &omega2, rest, theta)
            }
            Command::Assign(y, e) => {
                self.rule("T_ASSIGN");
                env::lookup(omega, y).map_err(env_err("T_ASSIGN"))?;
                let t = self.check_expr(gamma, omega, e)?;
                let omega2 = env::update(omega, y, t).map_err(env_err("T_ASSIGN"))?;
                self.check_seq(gamma, &omega2, rest, theta)
            }
            Command::For(l) => {
                self.rule("T_FOR");
                let n = loop_index(l);
                let frame = Abs::new(n.clone(), l.frame.clone());
                env::subset(&instantiate(&frame, &Individual::Zero), omega)
                    .map_err(env_err("T_FOR"))?;
                let bound = self.check_expr(gamma, omega, &l.bound)?;
                let i = nat_index("T_FOR", &bound)?;
                let eigen = self.fresh_eigen(&n);
                let nv = Individual::var(&eigen);
                let mut gamma2 = gamma.clone();
                gamma2.push(l.var.clone(), Prop::Nat(nv.clone()));
                let body = l.body.subst_ind(&n, &nv);
                let after = QEnv::Simple(instantiate(&frame, &Individual::succ(nv.clone())));
                self.check_seq(&gamma2, &instantiate(&frame, &nv), &body, &after)
                    .map_err(|e| match e.kind {
                        ErrorKind::SubsetViolation if e.rule == "T_EMPTY" => CheckError {
                            kind: ErrorKind::LoopFrameNotInvariant,
                            rule: "T_FOR",
                            ..e
                        },
                        _ => e,
                    })?;
                let omega2 = env::multi_update(omega, &instantiate(&frame, &i))
                    .map_err(env_err("T_FOR"))?;
                self.check_seq(gamma, &omega2, rest, theta)
            }
            Command::Call { callee, args, outs } => {
                self.rule("T_CALL");
                let t = self.check_expr(gamma, omega, callee)?;
                let (rhos, phi) = match &t {
                    Prop::Proc(rho) => match rho.as_ref() {
                        Prototype::Sig(ps, out) => (ps.clone(), out.clone()),
                        _ => {
                            return Err(CheckError::type_error(
                                "T_CALL",
                                format!(
                                    "calling the generic `{}`; instantiate it first",
                                    print_prop(&t)
                                ),
                            ))
                        }
                    },
                    other => {
                        return Err(CheckError::type_error(
                            "T_CALL",
                            format!("calling a value of type `{}`", print_prop(other)),
                        ))
                    }
                };
                self.check_args("T_CALL", gamma, omega, &rhos, args)?;
                distinct("T_CALL", outs)?;
                let update = env::qzip(outs, &phi).map_err(env_err("TC_QZIP"))?;
                self.update_seq(gamma, omega, &update, rest, theta)
            }
        }
    }
}

/// The loop's individual binder; an unindexed loop gets one that occurs
/// nowhere, so its frame is constant.
fn loop_index(l: &ForLoop) -> Name {
    match &l.index {
        Some(n) => n.clone(),
        None => {
            let mut avoid = l.frame.free_ind();
            avoid.extend(l.body.free_ind());
            crate::binding::fresh_name("n", &avoid)
        }
    }
}

/// Checks the definitions in order, then `main`.
pub fn id_check_program(
    c: &mut IdChecker,
    p: &Program,
) -> CheckResult<crate::simple::ProgramTyping> {
    let empty = PEnv::new();
    let mut consts = PEnv::new();
    let mut entry = None;
    for d in &p.defs {
        let t = c
            .check_expr(&consts, &empty, &d.expr)
            .map_err(|e| e.at(Some(d.span)))?;
        entry = Some(t.clone());
        consts.push(d.name.clone(), t);
    }
    if let Some(h) = &p.main {
        entry = Some(c.check_header(&consts, h)?);
    }
    Ok(crate::simple::ProgramTyping { consts, entry })
}

pub fn id_check_expr(gamma: &PEnv, omega: &PEnv, e: &Expr) -> CheckResult<Prop> {
    IdChecker::new().check_expr(gamma, omega, e)
}

pub fn id_check_seq(gamma: &PEnv, omega: &PEnv, s: &Seq, theta: &QEnv) -> CheckResult<()> {
    IdChecker::new().check_seq(gamma, omega, s, theta)
}

// ---------------------------------------------------------------------------
// Translation

/// ID→FD translator; fresh continuation-argument names come from a
/// per-run counter in the reserved `_v<k>` namespace.
#[derive(Default)]
pub struct IdTranslator {
    counter: Cell<usize>,
}

impl IdTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh_v(&self) -> Name {
        let k = self.counter.get() + 1;
        self.counter.set(k);
        format!("_v{k}")
    }

    pub fn expr(&self, e: &Expr) -> Term {
        match e {
            Expr::Var(x) => Term::Var(x.clone()),
            Expr::Star => Term::Tuple(Vec::new()),
            Expr::Num(n) => Term::num(*n),
            Expr::Axiom(a, b) => Term::Axiom(a.clone(), b.clone()),
            Expr::Proc(h) => self.header(h),
            Expr::Inst(inner, i) => Term::IndApp(Box::new(self.expr(inner)), i.clone()),
            Expr::ContInst(inner, fam, i) => {
                let v = self.fresh_v();
                let phi = Abs::new(fam.binder.clone(), translate_output(&fam.body));
                let packed = Term::Pack(
                    i.clone(),
                    Box::new(Term::var(v.clone())),
                    Formula::exists(phi.binder.clone(), phi.body.clone()),
                );
                Term::Fn(
                    v,
                    instantiate(&phi, i),
                    Box::new(Term::app(self.expr(inner), packed)),
                )
            }
            Expr::Coerce(inner, fam, proof) => Term::Coerce(
                Box::new(self.expr(inner)),
                Abs::new(fam.binder.clone(), translate_prop(&fam.body)),
                Box::new(self.expr(proof)),
            ),
        }
    }

    pub fn header(&self, h: &Header) -> Term {
        match h {
            Header::Forall(n, inner) => Term::IndLam(n.clone(), Box::new(self.header(inner))),
            Header::Params { params, out, body } => {
                let zs = out.idents();
                let ps = params
                    .iter()
                    .map(|(x, p)| (x.clone(), translate_prop(p)))
                    .collect();
                Term::FnTuple(ps, Box::new(init_unassigned(&zs, self.seq(body, &zs))))
            }
        }
    }

    fn args(&self, args: &[Expr]) -> Term {
        Term::Tuple(args.iter().map(|a| self.expr(a)).collect())
    }

    /// `(s)★` relative to the live vector `xs`.
    pub fn seq(&self, s: &Seq, xs: &[Name]) -> Term {
        match s {
            Seq::Empty => Term::tuple_of_vars(xs),
            Seq::Cst(_, y, e, rest) | Seq::Var(_, y, e, rest) => {
                Term::let_(y.clone(), self.expr(e), self.seq(rest, xs))
            }
            Seq::Unpack(n, rest) => Term::Unpack(n.clone(), Box::new(self.seq(rest, xs))),
            Seq::Witness(_, i, theta, rest) => {
                let (_, phi) = translate_qenv(theta);
                Term::Pack(i.clone(), Box::new(self.seq(rest, xs)), phi)
            }
            Seq::Subst(_, inner, fam, proof) => {
                let (_, phi) = translate_qenv(&fam.body);
                Term::Coerce(
                    Box::new(self.seq(inner, xs)),
                    Abs::new(fam.binder.clone(), phi),
                    Box::new(self.expr(proof)),
                )
            }
            Seq::Cmd(_, c, rest) => {
                let rest = self.seq(rest, xs);
                self.command(c, rest)
            }
        }
    }

    fn command(&self, c: &Command, rest: Term) -> Term {
        match c {
            Command::Assign(y, e) => Term::let_(y.clone(), self.expr(e), rest),
            Command::Inc(y) => {
                Term::let_(y.clone(), Term::succ(Term::var(y.clone())), rest)
            }
            Command::Dec(y) => {
                Term::let_(y.clone(), Term::Pred(Box::new(Term::var(y.clone()))), rest)
            }
            Command::Call { callee, args, outs } => Term::let_match(
                outs.clone(),
                Term::app(self.expr(callee), self.args(args)),
                rest,
            ),
            Command::Block(body, annot) => {
                let zs = annot.idents();
                Term::let_match(zs.clone(), self.seq(body, &zs), rest)
            }
            Command::Label { name, body, annot } => {
                let (zs, phi) = translate_qenv(annot);
                let k = Term::Fn(
                    name.clone(),
                    Formula::neg(phi),
                    Box::new(self.seq(body, &zs)),
                );
                Term::let_match(zs, Term::Callcc(Box::new(k)), rest)
            }
            Command::Jump {
                target,
                args,
                annot,
            } => {
                let (zs, phi) = translate_qenv(annot);
                let throw = Term::Throw(
                    phi,
                    Box::new(self.expr(target)),
                    Box::new(self.args(args)),
                );
                Term::let_match(zs, throw, rest)
            }
            Command::For(l) => {
                let n = loop_index(l);
                let (zs, phis) = translate_env(&l.frame);
                let ps = zs.iter().cloned().zip(phis.iter().cloned()).collect();
                let step = Term::IndLam(
                    n.clone(),
                    Box::new(Term::Fn(
                        l.var.clone(),
                        Formula::Nat(Individual::var(&n)),
                        Box::new(Term::FnTuple(ps, Box::new(self.seq(&l.body, &zs)))),
                    )),
                );
                let rec = Term::Rec {
                    bound: Box::new(self.expr(&l.bound)),
                    base: Box::new(Term::tuple_of_vars(&zs)),
                    step: Box::new(step),
                    motive: Some(Abs::new(n, Formula::Tuple(phis))),
                };
                Term::let_match(zs, rec, rest)
            }
        }
    }

    /// The program as one term: definitions become lets around the entry.
    pub fn program(&self, p: &Program) -> Option<Term> {
        let entry = match (&p.main, p.defs.last()) {
            (Some(h), _) => self.header(h),
            (None, Some(d)) => Term::var(d.name.clone()),
            (None, None) => return None,
        };
        Some(
            p.defs
                .iter()
                .rev()
                .fold(entry, |acc, d| Term::let_(d.name.clone(), self.expr(&d.expr), acc)),
        )
    }
}

pub fn translate_id(s: &Seq, live: &[Name]) -> Term {
    IdTranslator::new().seq(s, live)
}

pub fn translate_id_expr(e: &Expr) -> Term {
    IdTranslator::new().expr(e)
}

/// `translate_id_type` for each category.
pub fn translate_id_type(p: &Prop) -> Formula {
    translate_prop(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcheck::formulas_equal;
    use crate::surface::{parse_expr, parse_formula, parse_output, parse_prop, parse_qenv, parse_seq};

    fn ty(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn negation_of_outputs() {
        let o = parse_output("[nat(0)]").unwrap();
        assert_eq!(neg_output(&o), parse_prop("~(nat(0))").unwrap());
        let o = parse_output("exists u. [nat(u), ~nat(F32(u))]").unwrap();
        let neg = neg_output(&o);
        assert_eq!(print_prop(&neg), "proc forall u. ~(nat(u), ~nat(F32(u)))");
        assert!(alpha_eq(
            &translate_prop(&neg),
            &Formula::neg(translate_output(&o))
        ));
    }

    #[test]
    fn qenv_translation() {
        let q = parse_qenv("exists u. [r : nat(u), mk : ~nat(F32(u))]").unwrap();
        let (xs, f) = translate_qenv(&q);
        assert_eq!(xs, vec!["r".to_string(), "mk".to_string()]);
        assert_eq!(f, ty("exists u. <nat(u), ~<nat(F32(u))>>"));
    }

    #[test]
    fn prototype_translation() {
        let p = parse_prop("proc forall n. forall m. ([nat(n), nat(m)] out [nat(add(n, m))])").unwrap();
        assert_eq!(
            translate_prop(&p),
            ty("forall n. forall m. <nat(n), nat(m)> -> <nat(add(n, m))>")
        );
    }

    const ADD: &str = "proc forall n. forall m. [x : nat(n), y : nat(m)] out [z : nat(add(n, m))] {
        z := y :> {k/nat(k)}[add(0, m) = m];
        for i : nat(l) := 0 until x {
            inc(z);
            z := z :> {k/nat(k)}[add(succ(l), m) = succ(add(l, m))];
        } [z : nat(add(l, m))];
    }";

    #[test]
    fn dependent_addition_checks_and_translates() {
        let e = parse_expr(ADD).unwrap();
        let mut c = IdChecker::new();
        let t = c.check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap();
        assert!(alpha_eq(
            &t,
            &parse_prop("proc forall n. forall m. ([nat(n), nat(m)] out [nat(add(n, m))])").unwrap()
        ));
        let term = translate_id_expr(&e);
        let f = fd_check_term(&Env::new(), &term).unwrap();
        assert!(formulas_equal(&f, &translate_prop(&t)));
    }

    #[test]
    fn label_and_jump() {
        let e = parse_expr(
            "proc [] out [z : nat(0)] { k : { jump(k, 0) [z : nat(0)]; } [z : nat(0)]; }",
        )
        .unwrap();
        let t = id_check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap();
        let f = fd_check_term(&Env::new(), &translate_id_expr(&e)).unwrap();
        assert!(formulas_equal(&f, &translate_prop(&t)));
    }

    #[test]
    fn witness_and_unpack() {
        let e = parse_expr(
            "proc [] out exists n. [z : nat(n)] { z := 2; [succ(succ(0)) in exists n. [z : nat(n)]] }",
        )
        .unwrap();
        let t = id_check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap();
        let f = fd_check_term(&Env::new(), &translate_id_expr(&e)).unwrap();
        assert!(formulas_equal(&f, &translate_prop(&t)));
        let gamma: PEnv = [("p".to_string(), t)].into_iter().collect();
        let omega: PEnv = [("r".to_string(), Prop::Top)].into_iter().collect();
        let theta = parse_qenv("[r : top]").unwrap();
        let missing = parse_seq("p(; r);").unwrap();
        let err = id_check_seq(&gamma, &omega, &missing, &theta).unwrap_err();
        assert_eq!(err.kind, ErrorKind::MissingUnpack);
        let ok = parse_seq("p(; r); ?j. r := *;").unwrap();
        id_check_seq(&gamma, &omega, &ok, &theta).unwrap();
    }

    #[test]
    fn freshness_and_witness_errors() {
        let theta = parse_qenv("[y : top]").unwrap();
        let omega: PEnv = [("y".to_string(), Prop::Top)].into_iter().collect();
        let s = parse_seq("var y := *;").unwrap();
        let err = id_check_seq(&PEnv::new(), &omega, &s, &theta).unwrap_err();
        assert_eq!(err.kind, ErrorKind::FreshnessViolation);
        let theta = parse_qenv("exists n. [y : nat(n)]").unwrap();
        let s = parse_seq("y := 0; [0 in exists n. [y : nat(succ(n))]]").unwrap();
        let err = id_check_seq(&PEnv::new(), &omega, &s, &theta).unwrap_err();
        assert_eq!(err.kind, ErrorKind::WitnessMismatch);
    }

    #[test]
    fn continuation_instance_eta_expands() {
        let gamma: PEnv = [(
            "k".to_string(),
            parse_prop("proc forall u. ~(nat(u))").unwrap(),
        )]
        .into_iter()
        .collect();
        let e = parse_expr("k <: {u/[nat(u)]}{0}").unwrap();
        let t = id_check_expr(&gamma, &PEnv::new(), &e).unwrap();
        assert_eq!(t, parse_prop("~(nat(0))").unwrap());
        let sigma: Env<Formula> = gamma
            .iter()
            .map(|(x, p)| (x.clone(), translate_prop(p)))
            .collect();
        let f = fd_check_term(&sigma, &translate_id_expr(&e)).unwrap();
        assert!(formulas_equal(&f, &translate_prop(&t)));
        let bad = parse_expr("k{0}").unwrap();
        assert_eq!(
            id_check_expr(&gamma, &PEnv::new(), &bad).unwrap_err().kind,
            ErrorKind::NegationMismatch
        );
    }
}
