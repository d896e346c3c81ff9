//! The certification pipeline: parse, check the source, translate, check
//! the translation at the translated type, and evaluate.
//!
//! Each phase is timed and reported; a failing phase ends the run, so the
//! phases of a report always form a prefix of the full list.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::dependent::{id_check_program, IdChecker, IdTranslator};
use crate::error::CheckError;
use crate::fcheck::{formulas_equal, FChecker, Mode};
use crate::runtime::{erase, evaluate, interpret_i, run_procedure, PlainValue, RTerm, DEFAULT_FUEL};
use crate::simple::{is_check_program, IsChecker, IsTranslator, ProgramTyping, TranslateOptions};
use crate::surface::{parse_file, print_file, print_formula, print_prop, ParseError};
use crate::syntax::*;

/// Exit codes; scripts may rely on these values.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 1;
    pub const SOURCE_TYPE: i32 = 2;
    pub const TARGET_TYPE: i32 = 3;
    pub const RUNTIME: i32 = 4;
    pub const FUZZ: i32 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseName {
    Parse,
    CheckSource,
    Translate,
    CheckTarget,
    Evaluate,
}

impl PhaseName {
    pub fn label(self) -> &'static str {
        match self {
            PhaseName::Parse => "parse",
            PhaseName::CheckSource => "check-source",
            PhaseName::Translate => "translate",
            PhaseName::CheckTarget => "check-target",
            PhaseName::Evaluate => "evaluate",
        }
    }
}

/// Phase results. Absent fields are omitted from JSON.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Payload {
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub ty: Option<String>,
    /// Number of rule applications in the derivation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<Vec<&'static str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub args: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<PlainValue>,
    /// Output identifiers paired with their final values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<(Name, PlainValue)>>,
    /// Value computed by the reference interpreter, when it ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpreted: Option<PlainValue>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: PhaseName,
    pub ok: bool,
    pub elapsed_ms: f64,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Position {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub severity: &'static str,
    /// Label of the rule whose premise failed, or `PARSE`/`RUNTIME`.
    pub rule: String,
    pub kind: String,
    pub span: Option<Position>,
    pub message: String,
}

impl Diagnostic {
    fn error(rule: impl Into<String>, kind: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: "error",
            rule: rule.into(),
            kind: kind.into(),
            span: None,
            message: message.into(),
        }
    }

    fn from_check(e: &CheckError) -> Self {
        Diagnostic {
            severity: "error",
            rule: e.rule.to_string(),
            kind: e.kind.to_string(),
            span: e.span.map(|s| Position {
                line: s.line,
                col: s.col,
            }),
            message: e.message.clone(),
        }
    }

    fn from_parse(e: &ParseError) -> Self {
        Diagnostic {
            severity: "error",
            rule: "PARSE".into(),
            kind: "ParseError".into(),
            span: Some(Position {
                line: e.line,
                col: e.col,
            }),
            message: e.to_string(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: "warning",
            rule: String::new(),
            kind: "Warning".into(),
            span: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub file: String,
    pub discipline: Option<System>,
    pub phases: Vec<Phase>,
    pub diagnostics: Vec<Diagnostic>,
    /// Departures from a transcribed original, from `// adjusted:` lines.
    pub adjustments: Vec<String>,
    pub desugarings: Vec<String>,
    pub exit_code: i32,
}

impl PipelineReport {
    pub fn phase(&self, name: PhaseName) -> Option<&Phase> {
        self.phases.iter().find(|p| p.name == name)
    }

    pub fn ok(&self) -> bool {
        self.exit_code == exit::OK
    }
}

/// How far to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Check,
    Translate,
    Full,
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Overrides the file's `system` directive.
    pub system: Option<System>,
    /// Arguments for the entry procedure. Without them, evaluation runs
    /// only when the file carries an `// args:` line or the entry takes no
    /// parameters.
    pub args: Option<Vec<u64>>,
    pub fuel: u64,
    pub trace: bool,
    pub stage: Stage,
    pub translate: TranslateOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            system: None,
            args: None,
            fuel: DEFAULT_FUEL,
            trace: false,
            stage: Stage::Full,
            translate: TranslateOptions::default(),
        }
    }
}

/// Arguments from a `// args: 3, 2` line, if any.
pub fn args_directive(src: &str) -> Option<Vec<u64>> {
    src.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("//")?.trim().strip_prefix("args:")?;
        rest.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().ok())
            .collect()
    })
}

struct Run {
    report: PipelineReport,
    trace: bool,
}

impl Run {
    fn phase(&mut self, name: PhaseName, start: Instant, ok: bool, payload: Payload) {
        self.report.phases.push(Phase {
            name,
            ok,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            payload,
        });
    }

    fn fail(mut self, code: i32, d: Diagnostic) -> PipelineReport {
        self.report.diagnostics.push(d);
        self.report.exit_code = code;
        self.report
    }

    fn rules(&self, trace: &[&'static str]) -> Option<Vec<&'static str>> {
        self.trace.then(|| trace.to_vec())
    }
}

/// Reads and runs `path`. An unreadable file is reported as a parse error.
pub fn run_pipeline(path: &Path, opts: &PipelineOptions) -> PipelineReport {
    match std::fs::read_to_string(path) {
        Ok(src) => run_source(&path.display().to_string(), &src, opts),
        Err(e) => PipelineReport {
            file: path.display().to_string(),
            discipline: None,
            phases: Vec::new(),
            diagnostics: vec![Diagnostic::error("PARSE", "Io", format!("cannot read: {e}"))],
            adjustments: Vec::new(),
            desugarings: Vec::new(),
            exit_code: exit::PARSE,
        },
    }
}

/// Runs the pipeline on source text; `file` only labels the report.
pub fn run_source(file: &str, src: &str, opts: &PipelineOptions) -> PipelineReport {
    let mut run = Run {
        report: PipelineReport {
            file: file.to_string(),
            discipline: None,
            phases: Vec::new(),
            diagnostics: Vec::new(),
            adjustments: Vec::new(),
            desugarings: Vec::new(),
            exit_code: exit::OK,
        },
        trace: opts.trace,
    };

    let t = Instant::now();
    let parsed = match parse_file(src, opts.system) {
        Ok(f) => f,
        Err(e) => {
            run.phase(PhaseName::Parse, t, false, Payload::default());
            return run.fail(exit::PARSE, Diagnostic::from_parse(&e));
        }
    };
    run.phase(PhaseName::Parse, t, true, Payload::default());
    run.report.discipline = Some(parsed.system);
    run.report.adjustments = parsed.adjustments.clone();
    run.report.desugarings = parsed.desugarings.clone();
    let args = opts.args.clone().or_else(|| args_directive(src));

    match (&parsed.body, parsed.system) {
        (SourceBody::Program(p), sys @ (System::IS | System::ID)) => {
            program_pipeline(run, p, sys, args, opts)
        }
        (SourceBody::Term(t), sys @ (System::FS | System::FD)) => term_pipeline(run, t, sys, args, opts),
        (_, sys) => {
            let t = Instant::now();
            run.phase(PhaseName::CheckSource, t, false, Payload::default());
            run.fail(
                exit::SOURCE_TYPE,
                Diagnostic::error(
                    "PARSE",
                    "Unsupported",
                    format!("the file body does not belong to discipline {sys}"),
                ),
            )
        }
    }
}

fn term_size(t: &Term) -> usize {
    crate::surface::print_term(t).len()
}

fn program_pipeline(
    mut run: Run,
    p: &Program,
    sys: System,
    args: Option<Vec<u64>>,
    opts: &PipelineOptions,
) -> PipelineReport {
    let t = Instant::now();
    let (typing, trace, warnings): (Result<ProgramTyping, CheckError>, Vec<&'static str>, Vec<String>) =
        if sys == System::IS {
            let mut c = IsChecker::new();
            let r = is_check_program(&mut c, p);
            (r, c.trace, c.warnings)
        } else {
            let mut c = IdChecker::new();
            let r = id_check_program(&mut c, p);
            (r, c.trace, c.warnings)
        };
    run.report
        .diagnostics
        .extend(warnings.into_iter().map(Diagnostic::warning));
    let typing = match typing {
        Ok(ty) => ty,
        Err(e) => {
            let payload = Payload {
                derivation_size: Some(trace.len()),
                rules: run.rules(&trace),
                ..Payload::default()
            };
            run.phase(PhaseName::CheckSource, t, false, payload);
            return run.fail(exit::SOURCE_TYPE, Diagnostic::from_check(&e));
        }
    };
    let Some(entry) = typing.entry.clone() else {
        run.phase(PhaseName::CheckSource, t, false, Payload::default());
        return run.fail(
            exit::SOURCE_TYPE,
            Diagnostic::error("T_PROC", "NotFound", "the program defines nothing"),
        );
    };
    let payload = Payload {
        ty: Some(print_prop(&entry)),
        derivation_size: Some(trace.len()),
        rules: run.rules(&trace),
        ..Payload::default()
    };
    run.phase(PhaseName::CheckSource, t, true, payload);
    if opts.stage == Stage::Check {
        return run.report;
    }

    let t = Instant::now();
    let term = if sys == System::IS {
        IsTranslator::new(opts.translate).program(p)
    } else {
        IdTranslator::new().program(p)
    }
    .expect("a typed program has an entry");
    run.phase(
        PhaseName::Translate,
        t,
        true,
        Payload {
            term_size: Some(term_size(&term)),
            ..Payload::default()
        },
    );

    let t = Instant::now();
    let expected = crate::dependent::translate_prop(&entry);
    let mode = if sys == System::IS { Mode::Simple } else { Mode::Dependent };
    let mut fc = FChecker::new(mode);
    match fc.check(&Env::new(), &term) {
        Ok(found) if formulas_equal(&found, &expected) => {
            let payload = Payload {
                ty: Some(print_formula(&found)),
                derivation_size: Some(fc.trace.len()),
                rules: run.rules(&fc.trace),
                ..Payload::default()
            };
            run.phase(PhaseName::CheckTarget, t, true, payload);
        }
        Ok(found) => {
            run.phase(PhaseName::CheckTarget, t, false, Payload::default());
            return run.fail(
                exit::TARGET_TYPE,
                Diagnostic::error(
                    "TYPE_PRESERVATION",
                    "TypeError",
                    format!(
                        "translation has type {} but the source type translates to {}",
                        print_formula(&found),
                        print_formula(&expected)
                    ),
                ),
            );
        }
        Err(e) => {
            run.phase(PhaseName::CheckTarget, t, false, Payload::default());
            let mut d = Diagnostic::from_check(&e);
            d.message = format!("translation rejected (type-preservation defect): {}", d.message);
            return run.fail(exit::TARGET_TYPE, d);
        }
    }
    if opts.stage == Stage::Translate {
        return run.report;
    }

    let outs = p.main.as_ref().map(|h| h.peel().2.idents());
    let params = match &entry {
        Prop::Proc(rho) => Some(prototype_arity(rho)),
        _ => None,
    };
    let args = match (args, params) {
        (Some(a), _) => a,
        (None, Some(0)) => Vec::new(),
        _ => return run.report,
    };
    let t = Instant::now();
    let evaluated = run_procedure(&term, &args, opts.fuel);
    let interpreted = if sys == System::IS {
        Some(interpret_i(p, &args, opts.fuel))
    } else {
        None
    };
    let mut payload = Payload {
        args: Some(args.clone()),
        ..Payload::default()
    };
    match (&evaluated, &interpreted) {
        (Ok(v), None) | (Ok(v), Some(Ok(_))) => {
            if let Some(Ok(i)) = &interpreted {
                payload.interpreted = Some(i.clone());
                if i != v {
                    payload.value = Some(v.clone());
                    run.phase(PhaseName::Evaluate, t, false, payload);
                    return run.fail(
                        exit::RUNTIME,
                        Diagnostic::error(
                            "RUNTIME",
                            "Discrepancy",
                            format!("interpreter gives {i}, translation evaluates to {v}"),
                        ),
                    );
                }
            }
            payload.outputs = name_outputs(outs.as_deref(), v);
            payload.value = Some(v.clone());
            run.phase(PhaseName::Evaluate, t, true, payload);
            run.report
        }
        (Err(e), _) | (_, Some(Err(e))) => {
            run.phase(PhaseName::Evaluate, t, false, payload);
            run.fail(exit::RUNTIME, Diagnostic::error("RUNTIME", "RuntimeError", e.to_string()))
        }
    }
}

fn prototype_arity(rho: &Prototype) -> usize {
    match rho {
        Prototype::Sig(ps, _) | Prototype::Neg(ps) => ps.len(),
        Prototype::Forall(_, r) => prototype_arity(r),
    }
}

fn name_outputs(outs: Option<&[Name]>, v: &PlainValue) -> Option<Vec<(Name, PlainValue)>> {
    match (outs, v) {
        (Some(outs), PlainValue::Tuple(vs)) if outs.len() == vs.len() => {
            Some(outs.iter().cloned().zip(vs.iter().cloned()).collect())
        }
        _ => None,
    }
}

fn term_pipeline(
    mut run: Run,
    term: &Term,
    sys: System,
    args: Option<Vec<u64>>,
    opts: &PipelineOptions,
) -> PipelineReport {
    let t = Instant::now();
    let mode = if sys == System::FS { Mode::Simple } else { Mode::Dependent };
    let mut fc = FChecker::new(mode);
    match fc.check(&Env::new(), term) {
        Ok(ty) => {
            let payload = Payload {
                ty: Some(print_formula(&ty)),
                derivation_size: Some(fc.trace.len()),
                rules: run.rules(&fc.trace),
                ..Payload::default()
            };
            run.phase(PhaseName::CheckSource, t, true, payload);
        }
        Err(e) => {
            run.phase(PhaseName::CheckSource, t, false, Payload::default());
            return run.fail(exit::SOURCE_TYPE, Diagnostic::from_check(&e));
        }
    }
    if opts.stage != Stage::Full {
        return run.report;
    }
    let t = Instant::now();
    let result = erase(term).and_then(|r| {
        let r = match &args {
            Some(a) => RTerm::app(r, RTerm::Tuple(a.iter().map(|n| RTerm::num(*n)).collect())),
            None => r,
        };
        evaluate(&r, opts.fuel)
    });
    let payload = Payload {
        args: args.clone(),
        ..Payload::default()
    };
    match result {
        Ok(v) => {
            run.phase(
                PhaseName::Evaluate,
                t,
                true,
                Payload {
                    value: Some(v),
                    ..payload
                },
            );
            run.report
        }
        Err(e) => {
            run.phase(PhaseName::Evaluate, t, false, payload);
            run.fail(exit::RUNTIME, Diagnostic::error("RUNTIME", "RuntimeError", e.to_string()))
        }
    }
}

/// The translation of a program or term file, as the text of a `.t` file
/// in the target discipline.
pub fn translate_source(src: &str, system: Option<System>) -> Result<String, String> {
    let f = parse_file(src, system).map_err(|e| e.to_string())?;
    let (target, term) = match (&f.body, f.system) {
        (SourceBody::Program(p), System::IS) => (System::FS, IsTranslator::new(TranslateOptions::default()).program(p)),
        (SourceBody::Program(p), System::ID) => (System::FD, IdTranslator::new().program(p)),
        (SourceBody::Term(t), sys) => (sys, Some(t.clone())),
        _ => return Err("the file body does not match its discipline".into()),
    };
    let term = term.ok_or("the program defines nothing")?;
    Ok(print_file(&SourceFile {
        system: target,
        body: SourceBody::Term(term),
        adjustments: Vec::new(),
        desugarings: Vec::new(),
    }))
}

/// Human-readable rendering of a report.
pub fn render(report: &PipelineReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let disc = report
        .discipline
        .map(|d| format!(" [{d}]"))
        .unwrap_or_default();
    let _ = writeln!(s, "{}{disc}", report.file);
    for p in &report.phases {
        let status = if p.ok { "ok" } else { "FAILED" };
        let _ = write!(s, "  {:<13} {:<6} {:>9.3} ms", p.name.label(), status, p.elapsed_ms);
        if let Some(ty) = &p.payload.ty {
            let _ = write!(s, "  : {ty}");
        }
        if let Some(v) = &p.payload.value {
            let _ = write!(s, "  = {v}");
        }
        let _ = writeln!(s);
        if let Some(outs) = &p.payload.outputs {
            for (z, v) in outs {
                let _ = writeln!(s, "      {z} = {v}");
            }
        }
        if let Some(rules) = &p.payload.rules {
            let _ = writeln!(s, "      rules: {}", rules.join(" "));
        }
    }
    for a in &report.adjustments {
        let _ = writeln!(s, "  adjusted: {a}");
    }
    for d in &report.diagnostics {
        let span = d
            .span
            .map(|p| format!(" at {}:{}", p.line, p.col))
            .unwrap_or_default();
        if d.severity == "warning" {
            let _ = writeln!(s, "  warning: {}", d.message);
        } else {
            let _ = writeln!(s, "  error[{}] {}{span}: {}", d.kind, d.rule, d.message);
        }
    }
    if report.exit_code == exit::TARGET_TYPE {
        let _ = writeln!(s, "  DEFECT: the translation does not preserve typing");
    }
    let _ = writeln!(s, "  exit {}", report.exit_code);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADD: &str = "system IS;
// args: 3, 2
main [x : nat, y : nat] out [z : nat] {
    z := y;
    for i := 0 until x { inc(z); } [z : nat];
}";

    #[test]
    fn simple_addition_runs_every_phase() {
        let r = run_source("add.loop", ADD, &PipelineOptions::default());
        assert_eq!(r.exit_code, exit::OK, "{}", render(&r));
        assert_eq!(r.phases.len(), 5);
        let ev = r.phase(PhaseName::Evaluate).unwrap();
        assert_eq!(ev.payload.value, Some(PlainValue::Tuple(vec![PlainValue::Num(5)])));
        assert_eq!(ev.payload.interpreted, ev.payload.value);
    }

    #[test]
    fn explicit_args_override_the_directive() {
        let opts = PipelineOptions {
            args: Some(vec![4, 4]),
            ..PipelineOptions::default()
        };
        let r = run_source("add.loop", ADD, &opts);
        let v = r.phase(PhaseName::Evaluate).unwrap().payload.value.clone();
        assert_eq!(v, Some(PlainValue::Tuple(vec![PlainValue::Num(8)])));
    }

    #[test]
    fn exit_codes() {
        let r = run_source("bad.loop", "system IS; main [ out", &PipelineOptions::default());
        assert_eq!(r.exit_code, exit::PARSE);
        let r = run_source(
            "bad.loop",
            "system IS; main [] out [z : nat] { inc(z); }",
            &PipelineOptions::default(),
        );
        assert_eq!(r.exit_code, exit::SOURCE_TYPE);
        assert_eq!(r.diagnostics[0].rule, "T_INC");
        assert_eq!(r.phases.last().unwrap().name, PhaseName::CheckSource);
    }

    #[test]
    fn miscompilation_is_a_runtime_discrepancy() {
        let opts = PipelineOptions {
            translate: TranslateOptions { mutate_inc: true },
            ..PipelineOptions::default()
        };
        let r = run_source("add.loop", ADD, &opts);
        assert_eq!(r.exit_code, exit::RUNTIME, "{}", render(&r));
    }

    #[test]
    fn term_files_check_and_evaluate() {
        let r = run_source(
            "t.t",
            "system FS; rec(2, 0, fn y : nat => fn a : nat => succ(a))",
            &PipelineOptions::default(),
        );
        assert_eq!(r.exit_code, exit::OK, "{}", render(&r));
        let ev = r.phase(PhaseName::Evaluate).unwrap();
        assert_eq!(ev.payload.value, Some(PlainValue::Num(2)));
    }

    #[test]
    fn translated_files_reparse_and_check() {
        let t = translate_source(ADD, None).unwrap();
        let r = run_source("add.t", &t, &PipelineOptions {
            args: Some(vec![2, 2]),
            ..PipelineOptions::default()
        });
        assert_eq!(r.exit_code, exit::OK, "{t}\n{}", render(&r));
        let v = r.phase(PhaseName::Evaluate).unwrap().payload.value.clone();
        assert_eq!(v, Some(PlainValue::Tuple(vec![PlainValue::Num(4)])));
    }

    #[test]
    fn args_directive_parses() {
        assert_eq!(args_directive("// args: 3, 2\n"), Some(vec![3, 2]));
        assert_eq!(args_directive("// args:\n"), Some(vec![]));
        assert_eq!(args_directive("no args"), None);
    }
}
