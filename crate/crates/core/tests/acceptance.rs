//! Exit gate: one PASS/FAIL line per acceptance criterion, then a single
//! assertion that every criterion passed.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use loopcert::arith::{eval_individual, match_axiom, AxiomSchema};
use loopcert::binding::alpha_eq;
use loopcert::dependent::{id_check_program, IdChecker, IdTranslator};
use loopcert::fcheck::{formulas_equal, FChecker, Mode};
use loopcert::fuzz::{fuzz_differential, FuzzOptions};
use loopcert::pipeline::{exit, run_pipeline, PhaseName, PipelineOptions};
use loopcert::runtime::{run_procedure, PlainValue, DEFAULT_FUEL};
use loopcert::surface::{parse_file, parse_formula, parse_individual, parse_prop, print_individual};
use loopcert::syntax::{Env, Expr, Individual, Program, Prop, QEnv, SourceBody, System};

const ADDITION_BUDGET: Duration = Duration::from_secs(1);
const SHIFT_RESET_BUDGET: Duration = Duration::from_secs(2);
const FUZZ_BUDGET: Duration = Duration::from_secs(60);
const FUZZ_COUNT: usize = 200;
const FUZZ_SEED: u64 = 42;
const FUZZ_SIZE: usize = 30;
const NEAR_MISSES: usize = 50;
const SOUNDNESS_BOUND: u32 = 6;
const PROPERTY_CASES: u32 = 256;
const GENERATED_ASTS: u64 = 500;
const MIN_NEGATIVES: usize = 12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus(rel: &str) -> PathBuf {
    common::corpus_dir().join(rel)
}

fn load_program(path: &Path) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match parse_file(&src, None).map_err(|e| e.to_string())?.body {
        SourceBody::Program(p) => Ok(p),
        SourceBody::Term(_) => Err("expected an imperative program".into()),
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tuple(ns: &[u64]) -> PlainValue {
    PlainValue::Tuple(ns.iter().map(|n| PlainValue::Num(*n)).collect())
}

/// Unary addition: concatenate two tallies and count.
fn unary_add(a: u64, b: u64) -> u64 {
    let mut tally: Vec<()> = vec![(); a as usize];
    tally.extend(std::iter::repeat_n((), b as usize));
    tally.len() as u64
}

// ---------------------------------------------------------------------------

fn addition_example() -> Outcome {
    let start = Instant::now();
    let p = load_program(&corpus("figure1.loop"))?;
    let typing = id_check_program(&mut IdChecker::new(), &p).map_err(|e| e.to_string())?;
    let want = parse_prop("proc forall n. forall m. ([nat(n), nat(m)] out [nat(add(n, m))])")
        .map_err(|e| e.to_string())?;
    let got = typing.entry.ok_or("no entry procedure")?;
    require(alpha_eq(&got, &want), || format!("source type {got:?}"))?;

    let t = IdTranslator::new().program(&p).ok_or("nothing to translate")?;
    let ty = FChecker::new(Mode::Dependent)
        .check(&Env::new(), &t)
        .map_err(|e| e.to_string())?;
    let want = parse_formula("forall n. forall m. <nat(n), nat(m)> -> <nat(add(n, m))>")
        .map_err(|e| e.to_string())?;
    require(formulas_equal(&ty, &want), || format!("target type {ty:?}"))?;

    let five = run_procedure(&t, &[3, 2], DEFAULT_FUEL).map_err(|e| e.to_string())?;
    require(five == tuple(&[5]), || format!("(3, 2) gave {five}"))?;
    for a in 0..=6 {
        for b in 0..=6 {
            let v = run_procedure(&t, &[a, b], DEFAULT_FUEL).map_err(|e| e.to_string())?;
            require(v == tuple(&[unary_add(a, b)]), || format!("({a}, {b}) gave {v}"))?;
        }
    }
    let elapsed = start.elapsed();
    require(elapsed < ADDITION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("(3,2) -> <5>, 49 pairs agree with unary addition, {elapsed:?}"))
}

fn shift_reset_example() -> Outcome {
    let start = Instant::now();
    let path = corpus("figure2.loop");
    let p = load_program(&path)?;
    id_check_program(&mut IdChecker::new(), &p).map_err(|e| e.to_string())?;

    // The procedure `a` delivers z : nat(add(3, 2)), as does main.
    let want_z = Prop::Nat(parse_individual("add(3, 2)").map_err(|e| e.to_string())?);
    let outputs_z = |theta: &QEnv| match theta {
        QEnv::Simple(env) => env.iter().any(|(x, t)| x == "z" && alpha_eq(t, &want_z)),
        QEnv::Exists(..) => false,
    };
    let a = p.defs.iter().find(|d| d.name == "a").ok_or("no definition of a")?;
    let Expr::Proc(h) = &a.expr else {
        return Err("a is not a procedure".into());
    };
    require(outputs_z(h.peel().2), || "a does not output z : nat(add(3, 2))".into())?;
    let main = p.main.as_ref().ok_or("no main")?;
    require(outputs_z(main.peel().2), || "main does not output z : nat(add(3, 2))".into())?;

    let report = run_pipeline(&path, &PipelineOptions::default());
    require(report.exit_code == exit::OK, || format!("pipeline exit {}", report.exit_code))?;
    let target_ok = report.phase(PhaseName::CheckTarget).is_some_and(|ph| ph.ok);
    require(target_ok, || "target check did not pass".into())?;
    let outputs = report
        .phase(PhaseName::Evaluate)
        .and_then(|ph| ph.payload.outputs.clone())
        .ok_or("no evaluation outputs")?;
    let z = outputs.iter().find(|(x, _)| x == "z").map(|(_, v)| v.clone());
    // F32(0) = 3 and F32(1) = 2, so the shift/reset detour computes 3 + 2.
    let expected = PlainValue::Num(unary_add(3, 2));
    require(z.as_ref() == Some(&expected), || format!("z = {z:?}"))?;
    require(!report.adjustments.is_empty(), || "no adjustments reported".into())?;
    let elapsed = start.elapsed();
    require(elapsed < SHIFT_RESET_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "z : nat(add(3, 2)) = 5, {} adjustments reported, {elapsed:?}",
        report.adjustments.len()
    ))
}

// ---------------------------------------------------------------------------
// Axioms

/// Reference semantics written from the axioms as rewrite rules, counting
/// in unary. Shares no code with the library evaluator.
fn oracle(i: &Individual, a: u64, b: u64) -> u64 {
    use Individual as I;
    fn add(x: u64, y: u64) -> u64 {
        // add(0, m) = m; add(succ n, m) = succ(add(n, m)).
        (0..x).fold(y, |acc, _| acc + 1)
    }
    fn mult(x: u64, y: u64) -> u64 {
        // mult(0, m) = m; mult(succ n, m) = add(mult(n, m), m).
        (0..x).fold(y, |acc, _| add(acc, y))
    }
    match i {
        I::Zero => 0,
        I::Var(x) if x == "a" => a,
        I::Var(_) => b,
        I::Succ(x) => oracle(x, a, b) + 1,
        I::Pred(x) => oracle(x, a, b).saturating_sub(1),
        I::Add(x, y) => add(oracle(x, a, b), oracle(y, a, b)),
        I::Mult(x, y) => mult(oracle(x, a, b), oracle(y, a, b)),
        I::Sub(x, y) => oracle(x, a, b).saturating_sub(oracle(y, a, b)),
        I::F32(x) => {
            if oracle(x, a, b) == 0 {
                3
            } else {
                2
            }
        }
    }
}

/// The nine schemas written out by hand, with schema variables `a`, `b`.
const SCHEMAS: [(&str, &str, &str); 9] = [
    ("AX_REFL", "a", "a"),
    ("AX_PRED_0", "pred(0)", "0"),
    ("AX_PRED_S", "pred(succ(a))", "a"),
    ("AX_ADD_0", "add(0, b)", "b"),
    ("AX_ADD_S", "add(succ(a), b)", "succ(add(a, b))"),
    ("AX_MULT_0", "mult(0, b)", "b"),
    ("AX_MULT_S", "mult(succ(a), b)", "add(mult(a, b), b)"),
    ("AX_F32_0", "F32(0)", "3"),
    ("AX_F32_S", "F32(succ(a))", "2"),
];

/// Every tree obtained from `i` by changing one constructor.
fn perturb(i: &Individual) -> Vec<Individual> {
    use Individual as I;
    let mut out = vec![I::succ(i.clone())];
    match i {
        I::Zero => out.push(I::var("a")),
        I::Var(x) => {
            out.push(I::Zero);
            out.push(I::var(if x == "a" { "b" } else { "a" }));
        }
        I::Succ(x) => {
            out.push((**x).clone());
            out.push(I::pred((**x).clone()));
            out.extend(perturb(x).into_iter().map(I::succ));
        }
        I::Pred(x) => {
            out.push(I::f32((**x).clone()));
            out.extend(perturb(x).into_iter().map(I::pred));
        }
        I::F32(x) => {
            out.push(I::pred((**x).clone()));
            out.extend(perturb(x).into_iter().map(I::f32));
        }
        I::Add(x, y) | I::Mult(x, y) | I::Sub(x, y) => {
            let rebuild = |x: Individual, y: Individual| match i {
                I::Add(..) => I::add(x, y),
                I::Mult(..) => I::mult(x, y),
                _ => I::Sub(Box::new(x), Box::new(y)),
            };
            out.push(match i {
                I::Add(..) => I::mult((**x).clone(), (**y).clone()),
                _ => I::add((**x).clone(), (**y).clone()),
            });
            out.push(rebuild((**y).clone(), (**x).clone()));
            out.extend(perturb(x).into_iter().map(|x2| rebuild(x2, (**y).clone())));
            out.extend(perturb(y).into_iter().map(|y2| rebuild((**x).clone(), y2)));
        }
    }
    out
}

/// False for some assignment of the schema variables in 0..=4.
fn refutable(l: &Individual, r: &Individual) -> bool {
    (0..=4).any(|a| (0..=4).any(|b| oracle(l, a, b) != oracle(r, a, b)))
}

fn axioms() -> Outcome {
    use Individual as I;
    require(AxiomSchema::ALL.len() == 9, || "schema count".into())?;
    let parsed: Vec<(&str, Individual, Individual)> = SCHEMAS
        .iter()
        .map(|(n, l, r)| Ok((*n, parse_individual(l)?, parse_individual(r)?)))
        .collect::<Result<_, loopcert::surface::ParseError>>()
        .map_err(|e| e.to_string())?;

    // Positive instances with free schema variables.
    let mut accepted = BTreeSet::new();
    for (name, l, r) in &parsed {
        let s = match_axiom(l, r).map_err(|e| format!("{name} rejected: {e}"))?;
        require(s.name() == *name, || format!("{name} matched as {s}"))?;
        accepted.insert(s.name());
        // Also with compound terms in place of the schema variables.
        let (x, y) = (I::succ(I::var("n")), I::add(I::var("u"), I::Zero));
        let lx = l.subst_ind_pair(&x, &y);
        let rx = r.subst_ind_pair(&x, &y);
        let s = match_axiom(&lx, &rx).map_err(|e| format!("{name} (compound) rejected: {e}"))?;
        require(s.name() == *name, || format!("{name} (compound) matched as {s}"))?;
    }
    require(accepted.len() == 9, || "not all nine schemas accepted".into())?;

    // Near misses: one-constructor perturbations that are refutable.
    let mut misses: Vec<(Individual, Individual)> = Vec::new();
    for (_, l, r) in &parsed {
        let candidates = perturb(l)
            .into_iter()
            .map(|l2| (l2, r.clone()))
            .chain(perturb(r).into_iter().map(|r2| (l.clone(), r2)));
        for (l2, r2) in candidates {
            if refutable(&l2, &r2) && !misses.contains(&(l2.clone(), r2.clone())) {
                misses.push((l2, r2));
            }
        }
    }
    require(misses.len() >= NEAR_MISSES, || format!("only {} near misses", misses.len()))?;
    // Spread the sample across all schemas.
    let stride = misses.len() / NEAR_MISSES;
    let sample: Vec<_> = misses.iter().step_by(stride).take(NEAR_MISSES).collect();
    for (l, r) in &sample {
        if let Ok(s) = match_axiom(l, r) {
            return Err(format!(
                "near miss {} = {} accepted as {s}",
                print_individual(l),
                print_individual(r)
            ));
        }
    }

    // Soundness on closed instances: every accepted equation between small
    // closed terms holds in the oracle and in the library evaluator.
    let mut terms = Vec::new();
    for a in 0..=SOUNDNESS_BOUND {
        let na = I::num(a);
        terms.push(na.clone());
        terms.push(I::succ(na.clone()));
        terms.push(I::pred(na.clone()));
        terms.push(I::f32(na.clone()));
        for b in 0..=SOUNDNESS_BOUND {
            let nb = I::num(b);
            terms.push(I::add(na.clone(), nb.clone()));
            terms.push(I::mult(na.clone(), nb.clone()));
            terms.push(I::succ(I::add(na.clone(), nb.clone())));
            terms.push(I::add(I::mult(na.clone(), nb.clone()), nb.clone()));
        }
    }
    let mut proved = 0;
    for l in &terms {
        for r in &terms {
            if match_axiom(l, r).is_ok() {
                proved += 1;
                let (x, y) = (oracle(l, 0, 0), oracle(r, 0, 0));
                require(x == y, || {
                    format!("unsound: {} = {}", print_individual(l), print_individual(r))
                })?;
                let (ex, ey) = (eval_individual(l), eval_individual(r));
                require(ex == Ok(x) && ey == Ok(y), || {
                    format!("evaluator disagrees on {}", print_individual(l))
                })?;
            }
        }
    }
    Ok(format!(
        "9 schemas accepted, {NEAR_MISSES} of {} near misses rejected, {proved} closed instances sound",
        misses.len()
    ))
}

/// Simultaneous substitution for the schema variables `a` and `b`.
trait SubstPair {
    fn subst_ind_pair(&self, a: &Individual, b: &Individual) -> Individual;
}

impl SubstPair for Individual {
    fn subst_ind_pair(&self, a: &Individual, b: &Individual) -> Individual {
        use Individual as I;
        match self {
            I::Var(x) if x == "a" => a.clone(),
            I::Var(x) if x == "b" => b.clone(),
            I::Var(_) | I::Zero => self.clone(),
            I::Succ(x) => I::succ(x.subst_ind_pair(a, b)),
            I::Pred(x) => I::pred(x.subst_ind_pair(a, b)),
            I::F32(x) => I::f32(x.subst_ind_pair(a, b)),
            I::Add(x, y) => I::add(x.subst_ind_pair(a, b), y.subst_ind_pair(a, b)),
            I::Mult(x, y) => I::mult(x.subst_ind_pair(a, b), y.subst_ind_pair(a, b)),
            I::Sub(x, y) => I::Sub(
                Box::new(x.subst_ind_pair(a, b)),
                Box::new(y.subst_ind_pair(a, b)),
            ),
        }
    }
}

// ---------------------------------------------------------------------------

fn fuzz() -> Outcome {
    let report = fuzz_differential(&FuzzOptions {
        count: FUZZ_COUNT,
        seed: FUZZ_SEED,
        size_bound: FUZZ_SIZE,
        ..FuzzOptions::default()
    });
    require(report.count == FUZZ_COUNT, || format!("ran {} programs", report.count))?;
    if let Some(cx) = &report.counterexample {
        return Err(format!("counterexample {}: {}\n{}", cx.index, cx.failure, cx.program));
    }
    require(report.failed == 0 && report.passed == FUZZ_COUNT, || {
        format!("{} failed", report.failed)
    })?;
    let elapsed = Duration::from_millis(report.elapsed_ms as u64);
    require(elapsed < FUZZ_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} programs x {} inputs agree and preserve types, {elapsed:?}",
        report.passed, report.inputs_per_program
    ))
}

fn dependent_corpus() -> Outcome {
    const RULES: [&str; 5] = ["T_LABEL", "T_JUMP", "T_WITNESS", "T_SUBST", "T_FOR"];
    let opts = PipelineOptions {
        trace: true,
        ..PipelineOptions::default()
    };
    let mut files = 0;
    let mut extra = 0;
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for path in common::loop_files(&common::corpus_dir()) {
        if path.components().any(|c| c.as_os_str() == "negative") {
            continue;
        }
        let r = run_pipeline(&path, &opts);
        if r.discipline != Some(System::ID) {
            continue;
        }
        files += 1;
        require(r.exit_code != exit::TARGET_TYPE, || {
            format!("{}: type preservation defect", path.display())
        })?;
        for phase in [PhaseName::CheckSource, PhaseName::Translate, PhaseName::CheckTarget] {
            require(r.phase(phase).is_some_and(|p| p.ok), || {
                format!("{}: phase {} failed", path.display(), phase.label())
            })?;
        }
        require(r.exit_code == exit::OK, || format!("{}: exit {}", path.display(), r.exit_code))?;
        let is_showcase = path
            .file_name()
            .is_some_and(|n| n == "figure1.loop" || n == "figure2.loop");
        if !is_showcase {
            extra += 1;
            let rules = r
                .phase(PhaseName::CheckSource)
                .and_then(|p| p.payload.rules.clone())
                .unwrap_or_default();
            covered.extend(RULES.iter().filter(|rule| rules.contains(rule)));
        }
    }
    require(extra >= 3, || format!("only {extra} additional dependent programs"))?;
    let missing: Vec<_> = RULES.iter().filter(|r| !covered.contains(*r)).collect();
    require(missing.is_empty(), || format!("rules not exercised: {missing:?}"))?;
    Ok(format!(
        "{files} dependent programs pass all phases; {extra} extra programs cover {}",
        RULES.join(", ")
    ))
}

fn properties() -> Outcome {
    common::all_properties(PROPERTY_CASES, GENERATED_ASTS)
}

/// `// expect: exit=N rule=R`.
fn expectation(src: &str) -> Option<(i32, String)> {
    let line = src
        .lines()
        .find_map(|l| l.trim().strip_prefix("//")?.trim().strip_prefix("expect:"))?;
    let mut code = None;
    let mut rule = None;
    for part in line.split_whitespace() {
        if let Some(v) = part.strip_prefix("exit=") {
            code = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("rule=") {
            rule = Some(v.to_string());
        }
    }
    Some((code?, rule?))
}

fn negatives() -> Outcome {
    const REQUIRED: [&str; 6] = [
        "wrong_witness",
        "missing_unpack",
        "loop_frame_not_invariant",
        "undeclared_assign",
        "bad_axiom",
        "var_not_fresh",
    ];
    let files = common::loop_files(&corpus("negative"));
    require(files.len() >= MIN_NEGATIVES, || format!("only {} negative files", files.len()))?;
    for path in &files {
        let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let (code, rule) =
            expectation(&src).ok_or_else(|| format!("{}: no expect line", path.display()))?;
        let r = run_pipeline(path, &PipelineOptions::default());
        require(r.exit_code == code, || {
            format!("{}: exit {} instead of {code}", path.display(), r.exit_code)
        })?;
        require(r.diagnostics.iter().any(|d| d.rule == rule), || {
            format!("{}: no diagnostic cites {rule}", path.display())
        })?;
    }
    let stems: BTreeSet<String> = files
        .iter()
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    let absent: Vec<_> = REQUIRED.iter().filter(|s| !stems.contains(**s)).collect();
    require(absent.is_empty(), || format!("missing negative kinds: {absent:?}"))?;
    Ok(format!("{} broken programs fail with the expected exit code and rule", files.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("dependent addition example", addition_example),
        ("shift/reset example", shift_reset_example),
        ("axiom suite", axioms),
        ("simple-pipeline differential", fuzz),
        ("dependent preservation on corpus", dependent_corpus),
        ("kernel property suites", properties),
        ("negative-test suite", negatives),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
