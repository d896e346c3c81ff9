//! The simply typed half: pseudo-dynamic checking of I programs (IS) and
//! their state-passing translation into F, re-checked by [`fs_check_term`].
//!
//! Assignment may retype a store variable; the store environment `Ω` is
//! threaded through each sequence and its final shape is synthesized.

use std::collections::BTreeSet;

use crate::binding::{alpha_eq, free_term_vars};
use crate::dependent::translate_prop;
use crate::env::{self, PEnv};
use crate::error::{CheckError, CheckResult, ErrorKind};
use crate::surface::{print_env, print_prop};
use crate::syntax::*;

pub use crate::fcheck::fs_check_term;

/// Checker state for one IS run: the rule trace and non-fatal warnings.
#[derive(Default)]
pub struct IsChecker {
    pub trace: Vec<&'static str>,
    pub warnings: Vec<String>,
}

fn not_simple(rule: &'static str, what: &str) -> CheckError {
    CheckError::type_error(rule, format!("{what} is outside the simple imperative fragment"))
}

fn expect_prop(rule: &'static str, want: &Prop, got: &Prop) -> CheckResult<()> {
    if alpha_eq(want, got) {
        Ok(())
    } else {
        Err(CheckError::type_error(
            rule,
            format!("expected `{}`, found `{}`", print_prop(want), print_prop(got)),
        ))
    }
}

fn simple_env<'a>(rule: &'static str, theta: &'a QEnv) -> CheckResult<&'a PEnv> {
    match theta {
        QEnv::Simple(env) => Ok(env),
        QEnv::Exists(..) => Err(not_simple(rule, "a quantified environment")),
    }
}

fn well_formed(rule: &'static str, env: &PEnv) -> CheckResult<()> {
    for (x, p) in env.iter() {
        if !p.is_simple() {
            return Err(CheckError::type_error(
                rule,
                format!("`{x} : {}` is not a simple type", print_prop(p)),
            ));
        }
    }
    Ok(())
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

impl IsChecker {
    pub fn new() -> Self {
        Self::default()
    }

    fn rule(&mut self, r: &'static str) {
        self.trace.push(r);
    }

    /// `Γ; Ω ⊢ e : τ`.
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
                self.rule("T_UNIT");
                Ok(Prop::Top)
            }
            Expr::Num(_) => {
                self.rule("T_NUM");
                Ok(Prop::NatS)
            }
            Expr::Proc(h) => self.check_proc(gamma, h),
            Expr::Inst(..) => Err(not_simple("T_ENV_I", "procedure instantiation")),
            Expr::ContInst(..) => Err(not_simple("T_ENV_I", "continuation instantiation")),
            Expr::Coerce(..) => Err(not_simple("T_ENV_I", "coercion")),
            Expr::Axiom(..) => Err(not_simple("T_ENV_I", "an axiom")),
        }
    }

    fn check_proc(&mut self, gamma: &PEnv, h: &Header) -> CheckResult<Prop> {
        self.rule("T_PROC");
        let Header::Params { params, out, body } = h else {
            return Err(not_simple("T_PROC", "a universally quantified header"));
        };
        let omega = simple_env("T_PROC", out)?;
        well_formed("T_PROC", params)?;
        well_formed("T_PROC", omega)?;
        distinct("T_PROC", &omega.idents())?;
        let gamma2 = env::append(gamma, params);
        let start = env::init(&omega.idents(), Prop::Top);
        let end = self.check_seq(&gamma2, &start, body)?;
        if !alpha_eq(&end, omega) {
            return Err(CheckError::new(
                ErrorKind::OutputMismatch,
                "T_PROC",
                format!(
                    "declared outputs [{}], body produces [{}]",
                    print_env(omega),
                    print_env(&end)
                ),
            ));
        }
        let (_, sigmas) = env::split(params);
        let (_, taus) = env::split(omega);
        Ok(Prop::proc(Prototype::Sig(sigmas, Output::Simple(taus))))
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

    /// `Γ; Ω ⊢ s ▷ Ω'`, synthesizing the final store typing.
    pub fn check_seq(&mut self, gamma: &PEnv, omega: &PEnv, s: &Seq) -> CheckResult<PEnv> {
        let span = s.span();
        self.seq(gamma, omega, s).map_err(|e| e.at(span))
    }

    fn seq(&mut self, gamma: &PEnv, omega: &PEnv, s: &Seq) -> CheckResult<PEnv> {
        match s {
            Seq::Empty => {
                self.rule("T_EMPTY");
                Ok(omega.clone())
            }
            Seq::Cst(_, y, e, rest) => {
                self.rule("T_CST");
                let t = self.check_expr(gamma, omega, e)?;
                let mut gamma2 = gamma.clone();
                gamma2.push(y.clone(), t);
                self.check_seq(&gamma2, omega, rest)
            }
            Seq::Var(_, y, e, rest) => {
                self.rule("T_VAR");
                let t = self.check_expr(gamma, omega, e)?;
                let mut omega2 = omega.clone();
                omega2.push(y.clone(), t);
                let mut end = self.check_seq(gamma, &omega2, rest)?;
                match end.0.pop() {
                    Some((z, _)) if &z == y => Ok(end),
                    _ => unreachable!("updates preserve the domain of the store"),
                }
            }
            Seq::Cmd(_, c, rest) => self.command(gamma, omega, c, rest),
            Seq::Unpack(..) => Err(not_simple("T_EMPTY", "`?n.`")),
            Seq::Witness(..) => Err(not_simple("T_EMPTY", "a witness annotation")),
            Seq::Subst(..) => Err(not_simple("T_EMPTY", "a sequence coercion")),
        }
    }

    fn nat_in_store(&mut self, rule: &'static str, omega: &PEnv, y: &str) -> CheckResult<()> {
        let t = env::lookup(omega, y).map_err(|e| CheckError::from_env(rule, e))?;
        expect_prop(rule, &Prop::NatS, t)
    }

    fn command(&mut self, gamma: &PEnv, omega: &PEnv, c: &Command, rest: &Seq) -> CheckResult<PEnv> {
        match c {
            Command::Block(body, annot) => {
                self.rule("T_BLOCK");
                let frame = simple_env("T_BLOCK", annot)?;
                env::subset(frame, omega).map_err(|e| CheckError::from_env("T_BLOCK", e))?;
                let inner = self.check_seq(gamma, frame, body)?;
                let omega2 = env::multi_update(omega, &inner)
                    .map_err(|e| CheckError::from_env("T_BLOCK", e))?;
                self.check_seq(gamma, &omega2, rest)
            }
            Command::Inc(y) => {
                self.rule("T_INC");
                self.nat_in_store("T_INC", omega, y)?;
                self.check_seq(gamma, omega, rest)
            }
            Command::Dec(y) => {
                self.rule("T_DEC");
                self.nat_in_store("T_DEC", omega, y)?;
                self.check_seq(gamma, omega, rest)
            }
            Command::Assign(y, e) => {
                self.rule("T_ASSIGN");
                env::lookup(omega, y).map_err(|e| CheckError::from_env("T_ASSIGN", e))?;
                let t = self.check_expr(gamma, omega, e)?;
                let omega2 =
                    env::update(omega, y, t).map_err(|e| CheckError::from_env("T_ASSIGN", e))?;
                self.check_seq(gamma, &omega2, rest)
            }
            Command::For(l) => {
                self.rule("T_FOR");
                if l.index.is_some() {
                    return Err(not_simple("T_FOR", "an indexed loop"));
                }
                well_formed("T_FOR", &l.frame)?;
                env::subset(&l.frame, omega).map_err(|e| CheckError::from_env("T_FOR", e))?;
                let bound = self.check_expr(gamma, omega, &l.bound)?;
                expect_prop("T_FOR", &Prop::NatS, &bound)?;
                let mut gamma2 = gamma.clone();
                gamma2.push(l.var.clone(), Prop::NatS);
                let end = self.check_seq(&gamma2, &l.frame, &l.body)?;
                if !alpha_eq(&end, &l.frame) {
                    return Err(CheckError::new(
                        ErrorKind::LoopFrameNotInvariant,
                        "T_FOR",
                        format!(
                            "loop frame [{}] becomes [{}]",
                            print_env(&l.frame),
                            print_env(&end)
                        ),
                    ));
                }
                self.check_seq(gamma, omega, rest)
            }
            Command::Call { callee, args, outs } => {
                self.rule("T_CALL");
                let pt = self.check_expr(gamma, omega, callee)?;
                let (sigmas, taus) = match &pt {
                    Prop::Proc(rho) => match rho.as_ref() {
                        Prototype::Sig(ps, Output::Simple(qs)) => (ps.clone(), qs.clone()),
                        _ => return Err(not_simple("T_CALL", "a dependent prototype")),
                    },
                    other => {
                        return Err(CheckError::type_error(
                            "T_CALL",
                            format!("calling a value of type `{}`", print_prop(other)),
                        ))
                    }
                };
                let arg_ts = self.check_exprs(gamma, omega, args)?;
                if arg_ts.len() != sigmas.len() {
                    return Err(CheckError::new(
                        ErrorKind::LengthMismatch,
                        "T_CALL",
                        format!("expected {} arguments, found {}", sigmas.len(), arg_ts.len()),
                    ));
                }
                for (want, got) in sigmas.iter().zip(&arg_ts) {
                    expect_prop("T_CALL", want, got)?;
                }
                distinct("T_CALL", outs)?;
                let binds = env::zip(outs, &taus).map_err(|e| CheckError::from_env("T_CALL", e))?;
                let omega2 = env::multi_update(omega, &binds)
                    .map_err(|e| CheckError::from_env("T_CALL", e))?;
                self.check_seq(gamma, &omega2, rest)
            }
            Command::Jump { .. } => Err(not_simple("T_CALL", "a jump")),
            Command::Label { .. } => Err(not_simple("T_BLOCK", "a label")),
        }
    }
}

/// Constants and entry-point typing of a checked program.
#[derive(Debug, Clone)]
pub struct ProgramTyping {
    pub consts: PEnv,
    /// Type of `main` if present, else of the last definition.
    pub entry: Option<Prop>,
}

/// Checks the definitions in order, then `main`.
pub fn is_check_program(c: &mut IsChecker, p: &Program) -> CheckResult<ProgramTyping> {
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
        entry = Some(c.check_expr(&consts, &empty, &Expr::Proc(Box::new(h.clone())))?);
    }
    Ok(ProgramTyping { consts, entry })
}

pub fn is_check_expr(gamma: &PEnv, omega: &PEnv, e: &Expr) -> CheckResult<Prop> {
    IsChecker::new().check_expr(gamma, omega, e)
}

pub fn is_check_seq(gamma: &PEnv, omega: &PEnv, s: &Seq) -> CheckResult<PEnv> {
    IsChecker::new().check_seq(gamma, omega, s)
}

/// `τ★`; on simple types this is the identity except that procedure types
/// become arrows between tuples.
pub fn translate_is_type(p: &Prop) -> Formula {
    translate_prop(p)
}

/// Translation switches. The only knob is a deliberate miscompilation used
/// to show the differential fuzzer catches translation bugs.
#[derive(Debug, Clone, Copy, Default)]
pub struct TranslateOptions {
    #[doc(hidden)]
    pub mutate_inc: bool,
}

pub struct IsTranslator {
    pub options: TranslateOptions,
}

impl IsTranslator {
    pub fn new(options: TranslateOptions) -> Self {
        IsTranslator { options }
    }

    pub fn expr(&self, e: &Expr) -> Term {
        match e {
            Expr::Var(x) => Term::Var(x.clone()),
            Expr::Star => Term::Tuple(Vec::new()),
            Expr::Num(n) => Term::num(*n),
            Expr::Proc(h) => match h.as_ref() {
                Header::Params { params, out, body } => {
                    let zs = out.idents();
                    let ps = params
                        .iter()
                        .map(|(x, p)| (x.clone(), translate_is_type(p)))
                        .collect();
                    Term::FnTuple(ps, Box::new(init_unassigned(&zs, self.seq(body, &zs))))
                }
                Header::Forall(..) => unreachable!("rejected by the simple checker"),
            },
            _ => unreachable!("rejected by the simple checker"),
        }
    }

    /// `(s)★` relative to the live vector `xs`.
    pub fn seq(&self, s: &Seq, xs: &[Name]) -> Term {
        match s {
            Seq::Empty => Term::tuple_of_vars(xs),
            Seq::Cst(_, y, e, rest) | Seq::Var(_, y, e, rest) => {
                Term::let_(y.clone(), self.expr(e), self.seq(rest, xs))
            }
            Seq::Cmd(_, c, rest) => {
                let rest = self.seq(rest, xs);
                match c {
                    Command::Assign(y, e) => Term::let_(y.clone(), self.expr(e), rest),
                    Command::Inc(y) => {
                        let v = Box::new(Term::var(y.clone()));
                        let t = if self.options.mutate_inc {
                            Term::Pred(v)
                        } else {
                            Term::Succ(v)
                        };
                        Term::let_(y.clone(), t, rest)
                    }
                    Command::Dec(y) => {
                        Term::let_(y.clone(), Term::Pred(Box::new(Term::var(y.clone()))), rest)
                    }
                    Command::Call { callee, args, outs } => {
                        let arg = Term::Tuple(args.iter().map(|a| self.expr(a)).collect());
                        Term::let_match(outs.clone(), Term::app(self.expr(callee), arg), rest)
                    }
                    Command::Block(body, annot) => {
                        let zs = annot.idents();
                        Term::let_match(zs.clone(), self.seq(body, &zs), rest)
                    }
                    Command::For(l) => {
                        let zs = l.frame.idents();
                        let ps = l
                            .frame
                            .iter()
                            .map(|(x, p)| (x.clone(), translate_is_type(p)))
                            .collect();
                        let step = Term::Fn(
                            l.var.clone(),
                            Formula::NatS,
                            Box::new(Term::FnTuple(ps, Box::new(self.seq(&l.body, &zs)))),
                        );
                        let rec = Term::Rec {
                            bound: Box::new(self.expr(&l.bound)),
                            base: Box::new(Term::tuple_of_vars(&zs)),
                            step: Box::new(step),
                            motive: None,
                        };
                        Term::let_match(zs, rec, rest)
                    }
                    Command::Jump { .. } | Command::Label { .. } => {
                        unreachable!("rejected by the simple checker")
                    }
                }
            }
            Seq::Unpack(..) | Seq::Witness(..) | Seq::Subst(..) => {
                unreachable!("rejected by the simple checker")
            }
        }
    }

    /// The program as one term: definitions become lets around the entry.
    pub fn program(&self, p: &Program) -> Option<Term> {
        let entry = match (&p.main, p.defs.last()) {
            (Some(h), _) => self.expr(&Expr::Proc(Box::new(h.clone()))),
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

/// Outputs start out as `⋆`; bind the ones the body reads before writing.
pub(crate) fn init_unassigned(zs: &[Name], body: Term) -> Term {
    let free = free_term_vars(&body);
    zs.iter()
        .rev()
        .filter(|z| free.contains(*z))
        .fold(body, |acc, z| Term::let_(z.clone(), Term::Tuple(Vec::new()), acc))
}

pub fn translate_is(s: &Seq, live: &[Name]) -> Term {
    IsTranslator::new(TranslateOptions::default()).seq(s, live)
}

pub fn translate_is_expr(e: &Expr) -> Term {
    IsTranslator::new(TranslateOptions::default()).expr(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_expr, parse_formula, parse_seq, parse_term};

    const ADD: &str =
        "proc [x : nat, y : nat] out [z : nat] { z := y; for i := 0 until x { inc(z); } [z : nat]; }";

    fn env_of(pairs: &[(&str, Prop)]) -> PEnv {
        pairs.iter().map(|(x, p)| (x.to_string(), p.clone())).collect()
    }

    #[test]
    fn addition_procedure_types_and_translates() {
        let e = parse_expr(ADD).unwrap();
        let t = is_check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap();
        assert_eq!(print_prop(&t), "proc ([nat, nat] out [nat])");
        let term = translate_is_expr(&e);
        let expected = parse_term(
            "fn (x : nat, y : nat) => let z = y in let <z> = rec(x, <z>, fn i : nat => fn (z : nat) => let z = succ(z) in <z>) in <z>",
        )
        .unwrap();
        assert!(alpha_eq(&term, &expected));
        let ft = fs_check_term(&Env::new(), &term).unwrap();
        assert_eq!(ft, parse_formula("<nat, nat> -> <nat>").unwrap());
        assert!(alpha_eq(&ft, &translate_is_type(&t)));
    }

    #[test]
    fn assignment_retypes() {
        let s = parse_seq("y := 0;").unwrap();
        let out = is_check_seq(&PEnv::new(), &env_of(&[("y", Prop::Top)]), &s).unwrap();
        assert_eq!(out, env_of(&[("y", Prop::NatS)]));
    }

    #[test]
    fn invariant_loop_frame() {
        let s = parse_seq("for y := 0 until 2 { inc(z); } [z : nat];").unwrap();
        let omega = env_of(&[("z", Prop::NatS)]);
        assert_eq!(is_check_seq(&PEnv::new(), &omega, &s).unwrap(), omega);
        let bad = parse_seq("for y := 0 until 2 { z := *; } [z : nat];").unwrap();
        let err = is_check_seq(&PEnv::new(), &omega, &bad).unwrap_err();
        assert_eq!(err.kind, ErrorKind::LoopFrameNotInvariant);
    }

    #[test]
    fn undeclared_assignment() {
        let s = parse_seq("w := 0;").unwrap();
        let err = is_check_seq(&PEnv::new(), &env_of(&[("y", Prop::Top)]), &s).unwrap_err();
        assert_eq!(err.kind, ErrorKind::NotFound);
        assert_eq!(err.rule, "T_ASSIGN");
    }

    #[test]
    fn output_mismatch() {
        let e = parse_expr("proc [x : nat] out [z : nat] { }").unwrap();
        let err = is_check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap_err();
        assert_eq!(err.kind, ErrorKind::OutputMismatch);
    }

    #[test]
    fn unassigned_output_read_is_initialized() {
        let e = parse_expr("proc [] out [z : top] { z := z; }").unwrap();
        is_check_expr(&PEnv::new(), &PEnv::new(), &e).unwrap();
        let term = translate_is_expr(&e);
        assert!(crate::fcheck::formulas_equal(
            &fs_check_term(&Env::new(), &term).unwrap(),
            &parse_formula("<> -> <top>").unwrap()
        ));
    }

    #[test]
    fn empty_prototype() {
        let p = parse_prop("proc ([] out [])").unwrap();
        assert_eq!(translate_is_type(&p), parse_formula("<> -> <>").unwrap());
    }

    use crate::surface::parse_prop;
}
