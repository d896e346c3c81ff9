//! Property checks shared by the standalone property suite and the
//! acceptance gate. Each check drives a deterministic proptest runner and
//! reports the first counterexample as text.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use loopcert::binding::{alpha_eq, instantiate, open_with_eigen, Binding};
use loopcert::dependent::{neg_output, translate_output, translate_prop};
use loopcert::env::{multi_update, restrict, split, subset, update, zip};
use loopcert::gen::{case_rng, generate_program, GenConfig};
use loopcert::surface::{
    parse_file, parse_formula, parse_output, parse_prop, print_file, print_formula, print_output,
    print_prop,
};
use loopcert::syntax::{
    Abs, Env, Formula, Individual, Output, Program, Prop, Prototype, SourceBody, SourceFile,
};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.loop` file below `dir`, sorted.
pub fn loop_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("corpus directory exists") {
            let p = entry.expect("readable entry").path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "loop") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

// ---------------------------------------------------------------------------
// Strategies

const IND_VARS: [&str; 3] = ["n", "m", "u"];
const IDENTS: [&str; 6] = ["x", "y", "z", "w", "k", "r"];

pub fn individual() -> impl Strategy<Value = Individual> {
    let leaf = prop_oneof![
        Just(Individual::Zero),
        proptest::sample::select(&IND_VARS[..]).prop_map(Individual::var),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Individual::succ),
            inner.clone().prop_map(Individual::pred),
            inner.clone().prop_map(Individual::f32),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Individual::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Individual::mult(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Individual::Sub(Box::new(a), Box::new(b))),
        ]
    })
}

fn binder() -> impl Strategy<Value = String> {
    proptest::sample::select(&IND_VARS[..]).prop_map(str::to_string)
}

/// Wraps a simple output in up to `max_exists` existential binders.
fn quantify(max_exists: usize, ps: BoxedStrategy<Vec<Prop>>) -> BoxedStrategy<Output> {
    (ps, proptest::collection::vec(binder(), 0..=max_exists))
        .prop_map(|(ps, ns)| {
            ns.into_iter()
                .rev()
                .fold(Output::Simple(ps), |o, n| Output::Exists(n, Box::new(o)))
        })
        .boxed()
}

pub fn prop_type() -> BoxedStrategy<Prop> {
    let leaf = prop_oneof![
        Just(Prop::Top),
        Just(Prop::Bottom),
        Just(Prop::Var("A".into())),
        individual().prop_map(Prop::Nat),
        (individual(), individual()).prop_map(|(a, b)| Prop::Equals(a, b)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        let list = proptest::collection::vec(inner, 0..3).boxed();
        prop_oneof![
            list.clone().prop_map(Prop::Neg),
            (list.clone(), quantify(2, list.clone()), proptest::collection::vec(binder(), 0..=2))
                .prop_map(|(ps, out, ns)| {
                    let rho = ns.into_iter().rev().fold(Prototype::Sig(ps, out), |r, n| {
                        Prototype::Forall(n, Box::new(r))
                    });
                    Prop::proc(rho)
                }),
        ]
    })
    .boxed()
}

/// Outputs with at most `max_exists` leading existentials.
pub fn output(max_exists: usize) -> BoxedStrategy<Output> {
    quantify(
        max_exists,
        proptest::collection::vec(prop_type(), 0..3).boxed(),
    )
}

pub fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bottom),
        Just(Formula::PropVar("A".into())),
        individual().prop_map(Formula::Nat),
        (individual(), individual()).prop_map(|(a, b)| Formula::Equals(a, b)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::arrow(a, b)),
            inner.clone().prop_map(Formula::neg),
            (binder(), inner.clone()).prop_map(|(n, a)| Formula::forall(n, a)),
            (binder(), inner.clone()).prop_map(|(n, a)| Formula::exists(n, a)),
            proptest::collection::vec(inner, 0..3).prop_map(Formula::Tuple),
        ]
    })
}

/// Environments with distinct identifiers.
pub fn env() -> impl Strategy<Value = Env<Prop>> {
    proptest::collection::btree_set(proptest::sample::select(&IDENTS[..]), 0..=IDENTS.len())
        .prop_flat_map(|names| {
            let names: Vec<String> = names.into_iter().map(str::to_string).collect();
            let n = names.len();
            (
                Just(names).prop_shuffle(),
                proptest::collection::vec(prop_type(), n),
            )
        })
        .prop_map(|(names, ps)| names.into_iter().zip(ps).collect())
}

// ---------------------------------------------------------------------------
// Environment algebra

pub fn env_split_zip(cases: u32) -> Result<(), String> {
    run(cases, env(), |e| {
        let (xs, ts) = split(&e);
        let back = zip(&xs, &ts).map_err(|err| TestCaseError::fail(err.to_string()))?;
        ensure(alpha_eq(&back, &e), || format!("zip(split(e)) differs for {e:?}"))?;
        let (xs2, ts2) = split(&back);
        ensure(xs2 == xs && alpha_eq(&ts2, &ts), || "split(zip(xs, ts))".into())?;
        ensure(zip(&xs, &ts[..ts.len().saturating_sub(1)]).is_err() || ts.is_empty(), || {
            "zip accepted a length mismatch".into()
        })
    })
}

pub fn env_restrict_subset(cases: u32) -> Result<(), String> {
    let strat = env().prop_flat_map(|e| {
        let n = e.len();
        (Just(e), proptest::collection::vec(any::<bool>(), n))
    });
    run(cases, strat, |(e, keep)| {
        let xs: Vec<String> = e
            .idents()
            .into_iter()
            .zip(keep)
            .filter_map(|(x, k)| k.then_some(x))
            .collect();
        let r = restrict(&e, &xs).map_err(|err| TestCaseError::fail(err.to_string()))?;
        ensure(r.idents() == xs, || "restrict changed the domain order".into())?;
        ensure(subset(&r, &e).is_ok(), || format!("restrict(e, {xs:?}) is not a subset of e"))?;
        let all = restrict(&e, &e.idents()).map_err(|err| TestCaseError::fail(err.to_string()))?;
        ensure(alpha_eq(&all, &e), || "restricting to the full domain is not identity".into())
    })
}

pub fn env_update_domain(cases: u32) -> Result<(), String> {
    let strat = (env(), env(), prop_type(), any::<prop::sample::Index>());
    run(cases, strat, |(e, other, t, ix)| {
        let dom = e.idents();
        if !dom.is_empty() {
            let x = &dom[ix.index(dom.len())];
            let u = update(&e, x, t.clone()).map_err(|err| TestCaseError::fail(err.to_string()))?;
            ensure(u.idents() == dom, || "update changed the domain".into())?;
            ensure(
                u.iter().any(|(y, s)| y == x && alpha_eq(s, &t)),
                || "update lost the new binding".into(),
            )?;
        }
        ensure(update(&e, "absent", t).is_err(), || "update invented a binding".into())?;
        // Multi-update with the bindings of `other` that e already has.
        let shared: Env<Prop> = other
            .iter()
            .filter(|(y, _)| dom.contains(y))
            .cloned()
            .collect();
        let m = multi_update(&e, &shared).map_err(|err| TestCaseError::fail(err.to_string()))?;
        ensure(m.idents() == dom, || "multi_update changed the domain".into())?;
        ensure(subset(&shared, &m).is_ok(), || "multi_update lost a binding".into())
    })
}

// ---------------------------------------------------------------------------
// Printing and parsing

fn programs_alpha_eq(a: &Program, b: &Program) -> bool {
    a.defs.len() == b.defs.len()
        && a
            .defs
            .iter()
            .zip(&b.defs)
            .all(|(d, e)| d.name == e.name && alpha_eq(&d.expr, &e.expr))
        && match (&a.main, &b.main) {
            (Some(h), Some(k)) => alpha_eq(h, k),
            (None, None) => true,
            _ => false,
        }
}

pub fn files_alpha_eq(a: &SourceFile, b: &SourceFile) -> bool {
    a.system == b.system
        && a.adjustments == b.adjustments
        && match (&a.body, &b.body) {
            (SourceBody::Program(p), SourceBody::Program(q)) => programs_alpha_eq(p, q),
            (SourceBody::Term(s), SourceBody::Term(t)) => alpha_eq(s, t),
            _ => false,
        }
}

fn round_trip(f: &SourceFile) -> Result<(), String> {
    let text = print_file(f);
    let back = parse_file(&text, None).map_err(|e| format!("printed text does not parse: {e}\n{text}"))?;
    if files_alpha_eq(f, &back) {
        Ok(())
    } else {
        Err(format!("re-parse differs:\n{text}"))
    }
}

/// parse(print(x)) is alpha-equal to x for every parsable corpus file.
/// Returns the number of files checked.
pub fn parse_print_corpus() -> Result<usize, String> {
    let mut n = 0;
    for path in loop_files(&corpus_dir()) {
        let src = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let Ok(f) = parse_file(&src, None) else {
            continue;
        };
        round_trip(&f).map_err(|e| format!("{}: {e}", path.display()))?;
        n += 1;
    }
    Ok(n)
}

/// Round trip over `count` generated programs.
pub fn parse_print_generated(count: u64) -> Result<(), String> {
    for index in 0..count {
        let p = generate_program(&mut case_rng(7, index), GenConfig::default());
        let f = SourceFile {
            system: loopcert::syntax::System::IS,
            body: SourceBody::Program(p),
            adjustments: Vec::new(),
            desugarings: Vec::new(),
        };
        round_trip(&f).map_err(|e| format!("generated program {index}: {e}"))?;
    }
    Ok(())
}

/// Round trip over random types, formulas and outputs.
pub fn parse_print_types(cases: u32) -> Result<(), String> {
    run(cases, formula(), |f| {
        let text = print_formula(&f);
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        ensure(alpha_eq(&back, &f), || format!("formula {text}"))
    })?;
    run(cases, prop_type(), |p| {
        let text = print_prop(&p);
        let back = parse_prop(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        ensure(alpha_eq(&back, &p), || format!("prop {text}"))
    })?;
    run(cases, output(3), |o| {
        let text = print_output(&o);
        let back = parse_output(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        ensure(alpha_eq(&back, &o), || format!("output {text}"))
    })
}

// ---------------------------------------------------------------------------
// Binders

fn closed_individual() -> impl Strategy<Value = Individual> {
    (0u32..5).prop_map(Individual::num)
}

/// Opening with an eigenvariable and substituting agrees with direct
/// instantiation; renaming the binder to a fresh name is alpha-invisible.
pub fn open_subst(cases: u32) -> Result<(), String> {
    run(cases, (binder(), formula(), closed_individual(), individual()), |(n, body, c, i)| {
        let abs = Abs::new(n, body);
        let avoid: BTreeSet<String> = abs.free_ind();
        let (eigen, opened) = open_with_eigen(&abs, &avoid);
        ensure(!avoid.contains(&eigen), || "eigenvariable is not fresh".into())?;
        for by in [&c, &i] {
            let via_open = opened.subst_ind(&eigen, by);
            ensure(alpha_eq(&via_open, &instantiate(&abs, by)), || {
                format!("open then subst differs from instantiate for {abs:?} at {by:?}")
            })?;
        }
        let renamed = Abs::new(eigen.clone(), opened);
        ensure(alpha_eq(&renamed, &abs), || "renaming the binder changed the abstraction".into())
    })
}

// ---------------------------------------------------------------------------
// Negation and translation

/// translate(neg(φ)) = ¬translate(φ) for outputs with up to three
/// existentials.
pub fn neg_coherence(cases: u32) -> Result<(), String> {
    run(cases, output(3), |o| {
        let lhs = translate_prop(&neg_output(&o));
        let rhs = Formula::neg(translate_output(&o));
        ensure(alpha_eq(&lhs, &rhs), || {
            format!("{} : {} vs {}", print_output(&o), print_formula(&lhs), print_formula(&rhs))
        })
    })
}

/// Every property with `cases` random cases each; `Ok` carries a summary.
pub fn all_properties(cases: u32, generated: u64) -> Result<String, String> {
    env_split_zip(cases).map_err(|e| format!("split/zip: {e}"))?;
    env_restrict_subset(cases).map_err(|e| format!("restrict/subset: {e}"))?;
    env_update_domain(cases).map_err(|e| format!("update: {e}"))?;
    let files = parse_print_corpus()?;
    parse_print_generated(generated)?;
    parse_print_types(cases).map_err(|e| format!("types: {e}"))?;
    open_subst(cases).map_err(|e| format!("open/subst: {e}"))?;
    neg_coherence(cases).map_err(|e| format!("neg coherence: {e}"))?;
    Ok(format!(
        "{cases} cases per property, {files} corpus files and {generated} generated programs round-tripped"
    ))
}
