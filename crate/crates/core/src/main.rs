//! Command-line driver for the checker, translator, evaluator and fuzzer.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use loopcert::fuzz::{fuzz_differential, FuzzOptions};
use loopcert::pipeline::{
    exit, render, run_pipeline, translate_source, PipelineOptions, PipelineReport, Stage,
};
use loopcert::runtime::DEFAULT_FUEL;
use loopcert::simple::TranslateOptions;
use loopcert::surface::{parse_file, print_file};
use loopcert::syntax::System;

#[derive(Parser)]
#[command(name = "loopcert", version, about = "Check, translate and run LOOP programs with jumps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Override the file's `system` directive.
    #[arg(long, global = true, value_parser = parse_system)]
    system: Option<System>,
    /// Arguments of the entry procedure, e.g. `--args 3,2`.
    #[arg(long, global = true, value_delimiter = ',')]
    args: Option<Vec<u64>>,
    /// Evaluation step budget.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Emit JSON reports on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Include derivation rule labels in reports.
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and type-check a file.
    Check { file: PathBuf },
    /// Translate a file and write the target term next to it as `.t`.
    Translate {
        file: PathBuf,
        /// Output path; defaults to the input with extension `.t`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check, translate and evaluate a file.
    Eval { file: PathBuf },
    /// Run every phase, on one file or on the whole corpus.
    Pipeline {
        file: Option<PathBuf>,
        /// Run on every `.loop` file under `$LOOPCERT_CORPUS` (default
        /// `corpus`). Files under `negative/` must fail as their
        /// `// expect:` line says.
        #[arg(long)]
        all: bool,
    },
    /// Differential fuzzing of the simple translation.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Largest generated program, in commands.
        #[arg(long, default_value_t = 30)]
        size: usize,
        #[arg(long, hide = true)]
        mutate_inc: bool,
    },
    /// Pretty-print a file in canonical syntax.
    Fmt { file: PathBuf },
}

fn parse_system(s: &str) -> Result<System, String> {
    s.parse()
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn emit(report: &PipelineReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(report).expect("reports serialize"));
    } else {
        print!("{}", render(report));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = PipelineOptions {
        system: cli.system,
        args: cli.args.clone(),
        fuel: cli.fuel,
        trace: cli.trace,
        stage: Stage::Full,
        translate: TranslateOptions::default(),
    };
    match &cli.command {
        Cmd::Check { file } => {
            let r = run_pipeline(file, &PipelineOptions { stage: Stage::Check, ..opts });
            emit(&r, cli.json);
            code(r.exit_code)
        }
        Cmd::Translate { file, output } => {
            let r = run_pipeline(file, &PipelineOptions { stage: Stage::Translate, ..opts });
            if r.exit_code != exit::OK {
                emit(&r, cli.json);
                return code(r.exit_code);
            }
            let src = std::fs::read_to_string(file).unwrap_or_default();
            let out = output.clone().unwrap_or_else(|| file.with_extension("t"));
            let written = translate_source(&src, cli.system)
                .and_then(|t| std::fs::write(&out, t).map_err(|e| e.to_string()));
            match written {
                Ok(()) => {
                    if cli.json {
                        emit(&r, true);
                    } else {
                        print!("{}", render(&r));
                        println!("  wrote {}", out.display());
                    }
                    code(exit::OK)
                }
                Err(e) => {
                    eprintln!("{}: {e}", out.display());
                    code(exit::PARSE)
                }
            }
        }
        Cmd::Eval { file } | Cmd::Pipeline { file: Some(file), all: false } => {
            let r = run_pipeline(file, &opts);
            emit(&r, cli.json);
            code(r.exit_code)
        }
        Cmd::Pipeline { file: None, all: false } => {
            eprintln!("pipeline: give a file or --all");
            code(exit::PARSE)
        }
        Cmd::Pipeline { all: true, .. } => {
            let dir = std::env::var_os("LOOPCERT_CORPUS")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("corpus"));
            code(run_corpus(&dir, &opts, cli.json))
        }
        Cmd::Fuzz {
            count,
            seed,
            size,
            mutate_inc,
        } => {
            let report = fuzz_differential(&FuzzOptions {
                count: *count,
                seed: *seed,
                size_bound: *size,
                fuel: cli.fuel,
                translate: TranslateOptions {
                    mutate_inc: *mutate_inc,
                },
            });
            if cli.json {
                println!("{}", serde_json::to_string(&report).expect("reports serialize"));
            } else {
                println!(
                    "fuzz: {} programs (seed {}, at most {} commands), {} passed, {} failed, {} ms",
                    report.count,
                    report.seed,
                    report.size_bound,
                    report.passed,
                    report.failed,
                    report.elapsed_ms
                );
                if let Some(cx) = &report.counterexample {
                    println!("first counterexample (case {}, minimized):", cx.index);
                    println!("{}", cx.program);
                    println!("{}", cx.failure);
                }
            }
            code(report.exit_code())
        }
        Cmd::Fmt { file } => {
            let src = match std::fs::read_to_string(file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return code(exit::PARSE);
                }
            };
            match parse_file(&src, cli.system) {
                Ok(f) => {
                    print!("{}", print_file(&f));
                    code(exit::OK)
                }
                Err(e) => {
                    eprintln!("{}:{e}", file.display());
                    code(exit::PARSE)
                }
            }
        }
    }
}

/// `// expect: exit=2 rule=T_FOR` from a negative test file.
fn expectation(src: &str) -> Option<(i32, Option<String>)> {
    let line = src
        .lines()
        .find_map(|l| l.trim().strip_prefix("//")?.trim().strip_prefix("expect:"))?;
    let mut exit_code = None;
    let mut rule = None;
    for part in line.split_whitespace() {
        if let Some(v) = part.strip_prefix("exit=") {
            exit_code = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("rule=") {
            rule = Some(v.to_string());
        }
    }
    Some((exit_code?, rule))
}

fn loop_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return;
    };
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            loop_files(&p, out);
        } else if p.extension().is_some_and(|e| e == "loop") {
            out.push(p);
        }
    }
}

/// Positive files must pass; files with an `// expect:` line must fail
/// with that exit code and cite that rule. Returns the first unmet
/// expectation's exit code, or 0.
fn run_corpus(dir: &Path, opts: &PipelineOptions, json: bool) -> i32 {
    let mut files = Vec::new();
    loop_files(dir, &mut files);
    if files.is_empty() {
        eprintln!("no .loop files under {}", dir.display());
        return exit::PARSE;
    }
    let mut overall = exit::OK;
    let mut met = 0;
    for f in &files {
        let src = std::fs::read_to_string(f).unwrap_or_default();
        let r = run_pipeline(f, opts);
        let expected = expectation(&src);
        let ok = match &expected {
            None => r.exit_code == exit::OK,
            Some((c, rule)) => {
                r.exit_code == *c
                    && rule
                        .as_ref()
                        .is_none_or(|rule| r.diagnostics.iter().any(|d| &d.rule == rule))
            }
        };
        emit(&r, json);
        if !json {
            match (&expected, ok) {
                (Some((c, rule)), true) => println!(
                    "  expected failure met (exit={c}{})",
                    rule.as_ref().map(|r| format!(" rule={r}")).unwrap_or_default()
                ),
                (Some(_), false) => println!("  EXPECTATION NOT MET"),
                _ => {}
            }
        }
        if ok {
            met += 1;
        } else if overall == exit::OK {
            overall = if r.exit_code == exit::OK {
                exit::SOURCE_TYPE
            } else {
                r.exit_code
            };
        }
    }
    if !json {
        println!("corpus: {met}/{} files as expected", files.len());
    }
    overall
}
