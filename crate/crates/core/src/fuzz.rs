//! Differential fuzzing of the simple translation: generated programs must
//! keep their type through translation, and the reference interpreter must
//! agree with the machine on the translated term.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::fcheck::{formulas_equal, fs_check_term};
use crate::gen::{self, GenConfig};
use crate::runtime::{interpret_i, run_procedure, PlainValue, RuntimeError};
use crate::simple::{is_check_program, translate_is_type, IsChecker, IsTranslator, TranslateOptions};
use crate::surface::{print_file, print_formula};
use crate::syntax::*;

/// Input vectors tried per generated program.
pub const INPUTS_PER_PROGRAM: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct FuzzOptions {
    pub count: usize,
    pub seed: u64,
    pub size_bound: usize,
    pub fuel: u64,
    pub translate: TranslateOptions,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions {
            count: 200,
            seed: 42,
            size_bound: 30,
            fuel: crate::runtime::DEFAULT_FUEL,
            translate: TranslateOptions::default(),
        }
    }
}

/// Why a single case failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CaseFailure {
    /// The generator produced a program the source checker rejects.
    SourceRejected { message: String },
    /// The translation does not type-check in the target system.
    TargetRejected { message: String },
    /// The translation type-checks at the wrong type.
    TypeChanged { expected: String, found: String },
    /// Interpreter and machine disagree, or one of them failed.
    Discrepancy {
        inputs: Vec<u64>,
        interpreted: String,
        evaluated: String,
    },
}

impl std::fmt::Display for CaseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseFailure::SourceRejected { message } => write!(f, "source rejected: {message}"),
            CaseFailure::TargetRejected { message } => write!(f, "translation rejected: {message}"),
            CaseFailure::TypeChanged { expected, found } => {
                write!(f, "translation has type {found}, expected {expected}")
            }
            CaseFailure::Discrepancy {
                inputs,
                interpreted,
                evaluated,
            } => write!(
                f,
                "on inputs {inputs:?} the interpreter gives {interpreted} but the translation evaluates to {evaluated}"
            ),
        }
    }
}

fn shown(r: &Result<PlainValue, RuntimeError>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

/// Type preservation, then agreement on every input vector.
pub fn check_case(
    p: &Program,
    inputs: &[Vec<u64>],
    opts: &FuzzOptions,
) -> Result<(), CaseFailure> {
    let typing = is_check_program(&mut IsChecker::new(), p).map_err(|e| {
        CaseFailure::SourceRejected {
            message: e.to_string(),
        }
    })?;
    let term = IsTranslator::new(opts.translate)
        .program(p)
        .expect("generated programs have a main procedure");
    let expected = translate_is_type(typing.entry.as_ref().expect("entry typed"));
    let found = fs_check_term(&Env::new(), &term).map_err(|e| CaseFailure::TargetRejected {
        message: e.to_string(),
    })?;
    if !formulas_equal(&expected, &found) {
        return Err(CaseFailure::TypeChanged {
            expected: print_formula(&expected),
            found: print_formula(&found),
        });
    }
    for input in inputs {
        let interpreted = interpret_i(p, input, opts.fuel);
        let evaluated = run_procedure(&term, input, opts.fuel);
        if interpreted.is_err() || interpreted != evaluated {
            return Err(CaseFailure::Discrepancy {
                inputs: input.clone(),
                interpreted: shown(&interpreted),
                evaluated: shown(&evaluated),
            });
        }
    }
    Ok(())
}

/// A generated case: the program and its input vectors.
pub fn generate_case(seed: u64, index: u64, size_bound: usize) -> (Program, Vec<Vec<u64>>) {
    let mut rng = gen::case_rng(seed, index);
    let cfg = GenConfig {
        max_commands: size_bound,
        ..GenConfig::default()
    };
    let p = gen::generate_program(&mut rng, cfg);
    let arity = gen::entry_arity(&p);
    let inputs = (0..INPUTS_PER_PROGRAM)
        .map(|_| gen::random_inputs(&mut rng, arity))
        .collect();
    (p, inputs)
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub index: usize,
    /// The minimized program in surface syntax.
    pub program: String,
    pub commands: usize,
    pub failure: CaseFailure,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub count: usize,
    pub seed: u64,
    pub size_bound: usize,
    pub inputs_per_program: usize,
    pub passed: usize,
    pub failed: usize,
    /// Indices of failing cases, ascending.
    pub failures: Vec<usize>,
    /// The first failing case after shrinking.
    pub counterexample: Option<Counterexample>,
    pub elapsed_ms: u128,
}

impl FuzzReport {
    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            0
        } else {
            5
        }
    }
}

/// Runs `opts.count` cases in parallel; assembly of the report is
/// sequential and independent of scheduling.
pub fn fuzz_differential(opts: &FuzzOptions) -> FuzzReport {
    let start = Instant::now();
    let results: Vec<Result<(), CaseFailure>> = (0..opts.count)
        .into_par_iter()
        .map(|k| {
            let (p, inputs) = generate_case(opts.seed, k as u64, opts.size_bound);
            check_case(&p, &inputs, opts)
        })
        .collect();
    let failures: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_err())
        .map(|(k, _)| k)
        .collect();
    let counterexample = failures.first().map(|&k| {
        let (p, inputs) = generate_case(opts.seed, k as u64, opts.size_bound);
        let (p, failure) = shrink(p, inputs, opts);
        Counterexample {
            index: k,
            commands: gen::program_size(&p),
            program: print_file(&SourceFile {
                system: System::IS,
                body: SourceBody::Program(p),
                adjustments: Vec::new(),
                desugarings: Vec::new(),
            }),
            failure,
        }
    });
    FuzzReport {
        count: opts.count,
        seed: opts.seed,
        size_bound: opts.size_bound,
        inputs_per_program: INPUTS_PER_PROGRAM,
        passed: opts.count - failures.len(),
        failed: failures.len(),
        failures,
        counterexample,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// Greedy minimization of a failing case. Candidates are sequence prefixes
/// of `main` (closed with `z := 0` for each output), dropped definitions,
/// smaller numerals and smaller inputs; a candidate is kept when it still
/// type-checks and still fails.
pub fn shrink(p: Program, inputs: Vec<Vec<u64>>, opts: &FuzzOptions) -> (Program, CaseFailure) {
    let fails = |p: &Program, inputs: &[Vec<u64>]| -> Option<CaseFailure> {
        if is_check_program(&mut IsChecker::new(), p).is_err() {
            return None;
        }
        check_case(p, inputs, opts).err()
    };
    let mut failure = fails(&p, &inputs).expect("shrinking a failing case");
    // Only the failing input vector matters from here on.
    let mut inputs = match &failure {
        CaseFailure::Discrepancy { inputs, .. } => vec![inputs.clone()],
        _ => inputs.into_iter().take(1).collect(),
    };
    let mut best = p;
    loop {
        let mut improved = false;
        for cand in program_candidates(&best) {
            if let Some(f) = fails(&cand, &inputs) {
                best = cand;
                failure = f;
                improved = true;
                break;
            }
        }
        if !improved {
            for cand in input_candidates(&inputs[0]) {
                let cand = vec![cand];
                if let Some(f) = fails(&best, &cand) {
                    inputs = cand;
                    failure = f;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return (best, failure);
        }
    }
}

fn input_candidates(v: &[u64]) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for k in 0..v.len() {
        if v[k] > 0 {
            let mut w = v.to_vec();
            w[k] = 0;
            out.push(w.clone());
            w[k] = v[k] - 1;
            out.push(w);
        }
    }
    out
}

/// Strictly smaller programs: each candidate has fewer items or a smaller
/// numeral, so greedy shrinking terminates.
fn program_candidates(p: &Program) -> Vec<Program> {
    let mut out = Vec::new();
    if let Some(h) = &p.main {
        for h in header_candidates(h) {
            out.push(Program {
                defs: p.defs.clone(),
                main: Some(h),
            });
        }
    }
    for k in 0..p.defs.len() {
        let mut q = p.clone();
        q.defs.remove(k);
        out.push(q);
        if let Expr::Proc(h) = &p.defs[k].expr {
            for h in header_candidates(h) {
                let mut q = p.clone();
                q.defs[k].expr = Expr::Proc(Box::new(h));
                out.push(q);
            }
        }
    }
    out
}

fn header_candidates(h: &Header) -> Vec<Header> {
    let Header::Params { params, out: theta, body } = h else {
        return Vec::new();
    };
    let outs = theta.idents();
    let closing = |s: Seq| {
        gen::append(
            s,
            outs.iter()
                .map(|z| Command::Assign(z.clone(), Expr::Num(0)))
                .collect(),
        )
    };
    let with_body = |b: Seq| Header::Params {
        params: params.clone(),
        out: theta.clone(),
        body: b,
    };
    let mut out = Vec::new();
    let n = seq_len(body);
    for k in 0..n {
        let prefix = truncate(body, k);
        out.push(with_body(prefix.clone()));
        out.push(with_body(closing(prefix)));
    }
    for k in 0..n {
        if let Some(s) = drop_item(body, k) {
            out.push(with_body(s.clone()));
            out.push(with_body(closing(s)));
        }
    }
    for k in 0..n {
        for s in nested_candidates(body, k) {
            out.push(with_body(s));
        }
    }
    for s in smaller_numerals(body) {
        out.push(with_body(s));
    }
    out
}

/// Shorter bodies for every nested sequence of a sequence, without closing.
fn seq_candidates(s: &Seq) -> Vec<Seq> {
    let n = seq_len(s);
    let mut out: Vec<Seq> = (0..n).map(|k| truncate(s, k)).collect();
    out.extend((0..n).filter_map(|k| drop_item(s, k)));
    for k in 0..n {
        out.extend(nested_candidates(s, k));
    }
    out
}

/// Copies of `s` whose `k`-th item, a loop or block, has a shorter body.
fn nested_candidates(s: &Seq, k: usize) -> Vec<Seq> {
    match s {
        Seq::Cmd(sp, c, r) if k == 0 => {
            let bodies: Vec<Command> = match c {
                Command::For(l) => seq_candidates(&l.body)
                    .into_iter()
                    .map(|body| Command::For(Box::new(ForLoop { body, ..(**l).clone() })))
                    .collect(),
                Command::Block(b, th) => seq_candidates(b)
                    .into_iter()
                    .map(|b| Command::Block(Box::new(b), th.clone()))
                    .collect(),
                _ => Vec::new(),
            };
            bodies.into_iter().map(|c| Seq::Cmd(*sp, c, r.clone())).collect()
        }
        Seq::Cmd(sp, c, r) => nested_candidates(r, k - 1)
            .into_iter()
            .map(|r| Seq::Cmd(*sp, c.clone(), Box::new(r)))
            .collect(),
        Seq::Cst(sp, y, e, r) if k > 0 => nested_candidates(r, k - 1)
            .into_iter()
            .map(|r| Seq::Cst(*sp, y.clone(), e.clone(), Box::new(r)))
            .collect(),
        Seq::Var(sp, y, e, r) if k > 0 => nested_candidates(r, k - 1)
            .into_iter()
            .map(|r| Seq::Var(*sp, y.clone(), e.clone(), Box::new(r)))
            .collect(),
        _ => Vec::new(),
    }
}

fn seq_len(s: &Seq) -> usize {
    match s {
        Seq::Empty | Seq::Subst(..) => 0,
        Seq::Cmd(_, _, r) | Seq::Cst(_, _, _, r) | Seq::Var(_, _, _, r) => 1 + seq_len(r),
        Seq::Unpack(_, r) | Seq::Witness(_, _, _, r) => seq_len(r),
    }
}

/// The first `k` top-level items of `s`.
fn truncate(s: &Seq, k: usize) -> Seq {
    if k == 0 {
        return Seq::Empty;
    }
    match s {
        Seq::Empty | Seq::Subst(..) => s.clone(),
        Seq::Cmd(sp, c, r) => Seq::Cmd(*sp, c.clone(), Box::new(truncate(r, k - 1))),
        Seq::Cst(sp, y, e, r) => Seq::Cst(*sp, y.clone(), e.clone(), Box::new(truncate(r, k - 1))),
        Seq::Var(sp, y, e, r) => Seq::Var(*sp, y.clone(), e.clone(), Box::new(truncate(r, k - 1))),
        Seq::Unpack(n, r) => Seq::Unpack(n.clone(), Box::new(truncate(r, k))),
        Seq::Witness(sp, i, th, r) => {
            Seq::Witness(*sp, i.clone(), th.clone(), Box::new(truncate(r, k)))
        }
    }
}

/// `s` without its `k`-th top-level command.
fn drop_item(s: &Seq, k: usize) -> Option<Seq> {
    match s {
        Seq::Cmd(_, _, r) | Seq::Cst(_, _, _, r) | Seq::Var(_, _, _, r) if k == 0 => {
            Some((**r).clone())
        }
        Seq::Cmd(sp, c, r) => Some(Seq::Cmd(*sp, c.clone(), Box::new(drop_item(r, k - 1)?))),
        Seq::Cst(sp, y, e, r) => {
            Some(Seq::Cst(*sp, y.clone(), e.clone(), Box::new(drop_item(r, k - 1)?)))
        }
        Seq::Var(sp, y, e, r) => {
            Some(Seq::Var(*sp, y.clone(), e.clone(), Box::new(drop_item(r, k - 1)?)))
        }
        _ => None,
    }
}

/// Copies of `s` with one numeral replaced by a smaller one.
fn smaller_numerals(s: &Seq) -> Vec<Seq> {
    let total = count_numerals(s);
    let mut out = Vec::new();
    for k in 0..total {
        let mut seen = 0;
        let t = map_numeral(s, k, &mut seen);
        if t != *s {
            out.push(t);
        }
    }
    out
}

fn count_numerals(s: &Seq) -> usize {
    let mut seen = 0;
    let _ = map_numeral(s, usize::MAX, &mut seen);
    seen
}

fn shrink_expr(e: &Expr, target: usize, seen: &mut usize) -> Expr {
    match e {
        Expr::Num(n) => {
            let hit = *seen == target;
            *seen += 1;
            if hit && *n > 0 {
                Expr::Num(n / 2)
            } else {
                e.clone()
            }
        }
        _ => e.clone(),
    }
}

fn map_numeral(s: &Seq, target: usize, seen: &mut usize) -> Seq {
    match s {
        Seq::Empty => Seq::Empty,
        Seq::Cst(sp, y, e, r) => {
            let e = shrink_expr(e, target, seen);
            Seq::Cst(*sp, y.clone(), e, Box::new(map_numeral(r, target, seen)))
        }
        Seq::Var(sp, y, e, r) => {
            let e = shrink_expr(e, target, seen);
            Seq::Var(*sp, y.clone(), e, Box::new(map_numeral(r, target, seen)))
        }
        Seq::Cmd(sp, c, r) => {
            let c = match c {
                Command::Assign(y, e) => Command::Assign(y.clone(), shrink_expr(e, target, seen)),
                Command::For(l) => {
                    let bound = shrink_expr(&l.bound, target, seen);
                    let body = map_numeral(&l.body, target, seen);
                    Command::For(Box::new(ForLoop {
                        bound,
                        body,
                        ..(**l).clone()
                    }))
                }
                Command::Block(b, th) => {
                    Command::Block(Box::new(map_numeral(b, target, seen)), th.clone())
                }
                Command::Call { callee, args, outs } => Command::Call {
                    callee: callee.clone(),
                    args: args.iter().map(|a| shrink_expr(a, target, seen)).collect(),
                    outs: outs.clone(),
                },
                other => other.clone(),
            };
            Seq::Cmd(*sp, c, Box::new(map_numeral(r, target, seen)))
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cases_is_an_empty_passing_report() {
        let r = fuzz_differential(&FuzzOptions {
            count: 0,
            ..FuzzOptions::default()
        });
        assert_eq!((r.passed, r.failed, r.exit_code()), (0, 0, 0));
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn small_run_passes() {
        let r = fuzz_differential(&FuzzOptions {
            count: 40,
            seed: 9,
            ..FuzzOptions::default()
        });
        assert_eq!(r.failed, 0, "{:?}", r.counterexample);
    }

    #[test]
    fn miscompiled_inc_is_caught_and_shrunk() {
        let opts = FuzzOptions {
            count: 200,
            seed: 42,
            translate: TranslateOptions { mutate_inc: true },
            ..FuzzOptions::default()
        };
        let r = fuzz_differential(&opts);
        assert!(r.failed > 0);
        let cx = r.counterexample.unwrap();
        assert!(cx.program.contains("inc("), "{}", cx.program);
        assert!(cx.commands <= 6, "poorly shrunk:\n{}", cx.program);
    }
}
