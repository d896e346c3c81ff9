//! Deterministic ASCII printer. Output re-parses to an alpha-equal tree.

use std::fmt::Write;

use crate::syntax::*;

const INDENT: &str = "    ";

fn pad(depth: usize) -> String {
    INDENT.repeat(depth)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

pub fn print_individual(i: &Individual) -> String {
    match i {
        Individual::Var(x) => x.clone(),
        Individual::Zero => "0".into(),
        Individual::Succ(a) => format!("succ({})", print_individual(a)),
        Individual::Pred(a) => format!("pred({})", print_individual(a)),
        Individual::F32(a) => format!("F32({})", print_individual(a)),
        Individual::Add(a, b) => format!("add({}, {})", print_individual(a), print_individual(b)),
        Individual::Sub(a, b) => format!("sub({}, {})", print_individual(a), print_individual(b)),
        Individual::Mult(a, b) => {
            format!("mult({}, {})", print_individual(a), print_individual(b))
        }
    }
}

fn equation(a: &Individual, b: &Individual) -> String {
    format!("{} = {}", print_individual(a), print_individual(b))
}

// Formula precedence: 0 quantifiers and arrows, 1 negation, 2 atoms.
fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) | Formula::Arrow(..) => 0,
        Formula::Neg(_) => 1,
        _ => 2,
    }
}

fn formula_at(f: &Formula, level: u8) -> String {
    let s = match f {
        Formula::PropVar(x) => x.clone(),
        Formula::Top => "top".into(),
        Formula::Bottom => "bot".into(),
        Formula::NatS => "nat".into(),
        Formula::Nat(i) => format!("nat({})", print_individual(i)),
        Formula::Equals(a, b) => equation(a, b),
        Formula::Arrow(a, b) => format!("{} -> {}", formula_at(a, 1), formula_at(b, 0)),
        Formula::Neg(a) => format!("~{}", formula_at(a, 1)),
        Formula::Forall(n, a) => format!("forall {n}. {}", formula_at(a, 0)),
        Formula::Exists(n, a) => format!("exists {n}. {}", formula_at(a, 0)),
        Formula::Tuple(fs) => format!("<{}>", join(fs, print_formula)),
    };
    if formula_level(f) < level {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_formula(f: &Formula) -> String {
    formula_at(f, 0)
}

pub fn print_prop(p: &Prop) -> String {
    match p {
        Prop::Var(x) => x.clone(),
        Prop::Top => "top".into(),
        Prop::Bottom => "bot".into(),
        Prop::NatS => "nat".into(),
        Prop::Nat(i) => format!("nat({})", print_individual(i)),
        Prop::Equals(a, b) => equation(a, b),
        Prop::Proc(rho) => format!("proc {}", print_prototype(rho)),
        Prop::Neg(ps) if ps.len() == 1 => format!("~{}", print_prop(&ps[0])),
        Prop::Neg(ps) => format!("~({})", join(ps, print_prop)),
    }
}

pub fn print_prototype(rho: &Prototype) -> String {
    match rho {
        Prototype::Sig(ps, out) => format!("([{}] out {})", join(ps, print_prop), print_output(out)),
        Prototype::Forall(n, r) => format!("forall {n}. {}", print_prototype(r)),
        Prototype::Neg(ps) => format!("~({})", join(ps, print_prop)),
    }
}

pub fn print_output(out: &Output) -> String {
    match out {
        Output::Simple(ps) => format!("[{}]", join(ps, print_prop)),
        Output::Exists(n, o) => format!("exists {n}. {}", print_output(o)),
    }
}

pub fn print_env(env: &Env<Prop>) -> String {
    format!(
        "[{}]",
        join(&env.0, |(x, p)| format!("{x}:{}", print_prop(p)))
    )
}

pub fn print_qenv(theta: &QEnv) -> String {
    match theta {
        QEnv::Simple(env) => print_env(env),
        QEnv::Exists(n, q) => format!("exists {n}. {}", print_qenv(q)),
    }
}

fn expr_at(e: &Expr, postfix: bool, depth: usize) -> String {
    match e {
        Expr::Var(x) => x.clone(),
        Expr::Star => "*".into(),
        Expr::Num(k) => k.to_string(),
        Expr::Inst(e, i) => format!("{}{{{}}}", expr_at(e, true, depth), print_individual(i)),
        Expr::ContInst(e, fam, i) => format!(
            "{} <: {{{}/{}}}{{{}}}",
            expr_at(e, true, depth),
            fam.binder,
            print_output(&fam.body),
            print_individual(i)
        ),
        Expr::Coerce(e, fam, proof) => format!(
            "{} :> {{{}/{}}}[{}]",
            expr_at(e, true, depth),
            fam.binder,
            print_prop(&fam.body),
            expr_at(proof, false, depth)
        ),
        Expr::Axiom(a, b) if postfix => format!("({})", equation(a, b)),
        Expr::Axiom(a, b) => equation(a, b),
        Expr::Proc(h) => format!("proc {}", header(h, depth)),
    }
}

pub fn print_expr(e: &Expr) -> String {
    expr_at(e, false, 0)
}

fn header(h: &Header, depth: usize) -> String {
    match h {
        Header::Forall(n, inner) => format!("forall {n}. {}", header(inner, depth)),
        Header::Params { params, out, body } => {
            let mut s = format!("{} out {} {{\n", print_env(params), print_qenv(out));
            seq_into(body, depth + 1, &mut s);
            let _ = write!(s, "{}}}", pad(depth));
            s
        }
    }
}

pub fn print_header(h: &Header) -> String {
    header(h, 0)
}

fn seq_into(s: &Seq, depth: usize, out: &mut String) {
    let p = pad(depth);
    match s {
        Seq::Empty => {}
        Seq::Cmd(_, c, rest) => {
            command_into(c, depth, out);
            seq_into(rest, depth, out);
        }
        Seq::Cst(_, y, e, rest) => {
            let _ = writeln!(out, "{p}cst {y} = {};", expr_at(e, false, depth));
            seq_into(rest, depth, out);
        }
        Seq::Var(_, y, e, rest) => {
            let _ = writeln!(out, "{p}var {y} := {};", expr_at(e, false, depth));
            seq_into(rest, depth, out);
        }
        Seq::Unpack(n, rest) => {
            let _ = writeln!(out, "{p}?{n}.");
            seq_into(rest, depth, out);
        }
        Seq::Witness(_, i, theta, rest) => {
            let _ = writeln!(out, "{p}[{} in {}]", print_individual(i), print_qenv(theta));
            seq_into(rest, depth, out);
        }
        Seq::Subst(_, inner, fam, e) => {
            let _ = writeln!(out, "{p}(");
            seq_into(inner, depth + 1, out);
            let _ = writeln!(
                out,
                "{p}) :> {{{}/{}}}[{}];",
                fam.binder,
                print_qenv(&fam.body),
                expr_at(e, false, depth)
            );
        }
    }
}

fn command_into(c: &Command, depth: usize, out: &mut String) {
    let p = pad(depth);
    match c {
        Command::Block(s, theta) => {
            let _ = writeln!(out, "{p}{{");
            seq_into(s, depth + 1, out);
            let _ = writeln!(out, "{p}}}{};", print_qenv(theta));
        }
        Command::For(l) => {
            let idx = l
                .index
                .as_ref()
                .map(|n| format!(" : nat({n})"))
                .unwrap_or_default();
            let bound = match &l.bound {
                b @ (Expr::Var(_) | Expr::Num(_) | Expr::Star) => expr_at(b, false, depth),
                b => format!("({})", expr_at(b, false, depth)),
            };
            let _ = writeln!(out, "{p}for {}{idx} := 0 until {bound} {{", l.var);
            seq_into(&l.body, depth + 1, out);
            let _ = writeln!(out, "{p}}}{};", print_env(&l.frame));
        }
        Command::Assign(y, e) => {
            let _ = writeln!(out, "{p}{y} := {};", expr_at(e, false, depth));
        }
        Command::Inc(y) => {
            let _ = writeln!(out, "{p}inc({y});");
        }
        Command::Dec(y) => {
            let _ = writeln!(out, "{p}dec({y});");
        }
        Command::Call { callee, args, outs } => {
            let args = args
                .iter()
                .map(|a| expr_at(a, false, depth))
                .collect::<Vec<_>>()
                .join(", ");
            let callee = match callee {
                Expr::Var(x) => x.clone(),
                Expr::Num(_) | Expr::Star => format!("({})", print_expr(callee)),
                other => expr_at(other, true, depth),
            };
            let _ = writeln!(out, "{p}{callee}({args}; {});", outs.join(", "));
        }
        Command::Jump {
            target,
            args,
            annot,
        } => {
            let mut parts = vec![expr_at(target, false, depth)];
            parts.extend(args.iter().map(|a| expr_at(a, false, depth)));
            let _ = writeln!(out, "{p}jump({}){};", parts.join(", "), print_qenv(annot));
        }
        Command::Label { name, body, annot } => {
            let _ = writeln!(out, "{p}{name} : {{");
            seq_into(body, depth + 1, out);
            let _ = writeln!(out, "{p}}}{};", print_qenv(annot));
        }
    }
}

pub fn print_seq(s: &Seq) -> String {
    let mut out = String::new();
    seq_into(s, 0, &mut out);
    out
}

// Term precedence: 0 binders and prefix forms, 1 application, 2 postfix, 3 atoms.
fn term_level(t: &Term) -> u8 {
    match t {
        Term::Fn(..)
        | Term::FnTuple(..)
        | Term::IndLam(..)
        | Term::Let(..)
        | Term::LetMatch(..)
        | Term::Unpack(..)
        | Term::Callcc(_)
        | Term::Throw(..) => 0,
        Term::App(..) => 1,
        Term::IndApp(..) | Term::Coerce(..) => 2,
        _ => 3,
    }
}

fn term_at(t: &Term, level: u8, depth: usize) -> String {
    if term_level(t) < level {
        return format!("({})", term_at(t, 0, depth));
    }
    let p = pad(depth);
    match t {
        Term::Var(x) => x.clone(),
        Term::Zero => "0".into(),
        Term::Succ(a) => format!("succ({})", term_at(a, 0, depth)),
        Term::Pred(a) => format!("pred({})", term_at(a, 0, depth)),
        Term::Fn(x, f, body) => format!(
            "fn {x} : {} => {}",
            print_formula(f),
            body_at(body, depth)
        ),
        Term::FnTuple(ps, body) => format!(
            "fn ({}) => {}",
            join(ps, |(x, f)| format!("{x} : {}", print_formula(f))),
            body_at(body, depth)
        ),
        Term::App(f, a) => format!("{} {}", term_at(f, 1, depth), term_at(a, 2, depth)),
        Term::IndLam(n, body) => format!("lam {n}. {}", body_at(body, depth)),
        Term::IndApp(f, i) => format!("{}{{{}}}", term_at(f, 2, depth), print_individual(i)),
        Term::Rec {
            bound,
            base,
            step,
            motive,
        } => {
            let m = motive
                .as_ref()
                .map(|m| format!("{{{}. {}}}", m.binder, print_formula(&m.body)))
                .unwrap_or_default();
            format!(
                "rec{m}({}, {}, {})",
                term_at(bound, 0, depth),
                term_at(base, 0, depth),
                term_at(step, 0, depth)
            )
        }
        Term::Tuple(ts) => format!(
            "<{}>",
            ts.iter()
                .map(|t| term_at(t, 0, depth))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Term::Let(x, a, b) => format!(
            "let {x} = {} in\n{p}{}",
            term_at(a, 0, depth + 1),
            term_at(b, 0, depth)
        ),
        Term::LetMatch(xs, a, b) => format!(
            "let <{}> = {} in\n{p}{}",
            xs.join(", "),
            term_at(a, 0, depth + 1),
            term_at(b, 0, depth)
        ),
        Term::Pack(i, a, f) => format!(
            "pack({}, {} : {})",
            print_individual(i),
            term_at(a, 0, depth),
            print_formula(f)
        ),
        Term::Unpack(n, a) => format!("?{n}. {}", term_at(a, 0, depth)),
        Term::Coerce(a, fam, proof) => {
            let proof = match proof.as_ref() {
                Term::Axiom(l, r) => equation(l, r),
                other => term_at(other, 0, depth),
            };
            format!(
                "{} :> {{{}/{}}}[{proof}]",
                term_at(a, 2, depth),
                fam.binder,
                print_formula(&fam.body)
            )
        }
        Term::Axiom(a, b) => format!("({})", equation(a, b)),
        Term::Callcc(a) => format!("callcc {}", term_at(a, 2, depth)),
        Term::Throw(f, k, v) => format!(
            "throw[{}] {} {}",
            print_formula(f),
            term_at(k, 2, depth),
            term_at(v, 2, depth)
        ),
    }
}

fn body_at(body: &Term, depth: usize) -> String {
    if matches!(body, Term::Let(..) | Term::LetMatch(..)) {
        format!("\n{}{}", pad(depth + 1), term_at(body, 0, depth + 1))
    } else {
        term_at(body, 0, depth)
    }
}

pub fn print_term(t: &Term) -> String {
    term_at(t, 0, 0)
}

pub fn print_program(p: &Program) -> String {
    let mut s = String::new();
    for d in &p.defs {
        let _ = writeln!(s, "cst {} = {};\n", d.name, expr_at(&d.expr, false, 0));
    }
    if let Some(h) = &p.main {
        let _ = writeln!(s, "main {}", header(h, 0));
    }
    s
}

pub fn print_file(f: &SourceFile) -> String {
    let mut s = format!("system {};\n", f.system);
    for note in &f.adjustments {
        let _ = writeln!(s, "// adjusted: {note}");
    }
    s.push('\n');
    match &f.body {
        SourceBody::Program(p) => s.push_str(&print_program(p)),
        SourceBody::Term(t) => {
            s.push_str(&print_term(t));
            s.push('\n');
        }
    }
    s
}
