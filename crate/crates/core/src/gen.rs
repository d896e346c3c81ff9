//! Random well-typed jump-free programs of the simple imperative discipline.
//!
//! Generation runs the typing rules forwards: the generator tracks the
//! constant and store typings as it emits each item, and only emits items
//! whose premises hold in the current typing. Every program it returns is
//! accepted by the simple checker, which the tests confirm.
//!
//! Name pools are disjoint and every binder is fresh, so no constant ever
//! shares a name with a store variable.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::*;

/// Largest numeral the generator writes and largest input value it draws.
pub const MAX_NUMERAL: u32 = 4;
pub const MAX_INPUT: u64 = 5;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    /// Upper bound on [`program_size`] of every generated program.
    pub max_commands: usize,
    /// Nesting bound for loops, blocks and inline procedures.
    pub max_depth: usize,
    pub max_params: usize,
    pub max_outputs: usize,
    pub max_defs: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_commands: 30,
            max_depth: 3,
            max_params: 3,
            max_outputs: 3,
            max_defs: 2,
        }
    }
}

/// The generator state for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Commands in all definitions and in `main`, nested bodies included.
pub fn program_size(p: &Program) -> usize {
    let defs: usize = p
        .defs
        .iter()
        .map(|d| match &d.expr {
            Expr::Proc(h) => h.peel().3.command_count(),
            _ => 0,
        })
        .sum();
    defs + p.main.as_ref().map_or(0, |h| h.peel().3.command_count())
}

/// Arity of the entry procedure of a generated program.
pub fn entry_arity(p: &Program) -> usize {
    p.main.as_ref().map_or(0, |h| h.peel().1.len())
}

pub fn random_inputs(rng: &mut ChaCha8Rng, arity: usize) -> Vec<u64> {
    (0..arity).map(|_| rng.gen_range(0..=MAX_INPUT)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    /// `small` constants hold values bounded by the inputs or a numeral, so
    /// they are safe loop bounds.
    Nat { small: bool },
    Unit,
    Proc { ins: usize, outs: usize },
}

impl Ty {
    fn is_nat(self) -> bool {
        matches!(self, Ty::Nat { .. })
    }
}

#[derive(Clone, Default)]
struct Scope {
    gamma: Vec<(Name, Ty)>,
    omega: Vec<(Name, Ty)>,
}

impl Scope {
    fn nat_consts(&self, small_only: bool) -> Vec<&Name> {
        self.gamma
            .iter()
            .filter(|(_, t)| matches!(t, Ty::Nat { small } if *small || !small_only))
            .map(|(x, _)| x)
            .collect()
    }

    fn store_vars(&self, nat_only: bool) -> Vec<&Name> {
        self.omega
            .iter()
            .filter(|(_, t)| if nat_only { t.is_nat() } else { !matches!(t, Ty::Proc { .. }) })
            .map(|(x, _)| x)
            .collect()
    }

    fn set(&mut self, x: &str, t: Ty) {
        if let Some(slot) = self.omega.iter_mut().rev().find(|(y, _)| y == x) {
            slot.1 = t;
        }
    }
}

enum Item {
    Cst(Name, Expr),
    Var(Name, Expr),
    Cmd(Command),
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    cfg: GenConfig,
    fresh: usize,
    /// Commands still available; never negative.
    budget: usize,
}

const STORE_NAT: Ty = Ty::Nat { small: false };

impl Gen<'_> {
    fn fresh(&mut self, prefix: &str) -> Name {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn numeral(&mut self) -> Expr {
        Expr::Num(self.rng.gen_range(0..=MAX_NUMERAL))
    }

    fn nat_expr(&mut self, sc: &Scope) -> Expr {
        let consts = sc.nat_consts(false);
        let vars = sc.store_vars(true);
        match self.rng.gen_range(0..3) {
            0 if !vars.is_empty() => Expr::var(vars.choose(self.rng).unwrap().as_str()),
            1 if !consts.is_empty() => Expr::var(consts.choose(self.rng).unwrap().as_str()),
            _ => self.numeral(),
        }
    }

    /// Loop bounds only read small constants so iteration counts stay tiny.
    fn bound_expr(&mut self, sc: &Scope) -> Expr {
        let small = sc.nat_consts(true);
        if !small.is_empty() && self.rng.gen_bool(0.5) {
            Expr::var(small.choose(self.rng).unwrap().as_str())
        } else {
            Expr::Num(self.rng.gen_range(0..=3))
        }
    }

    fn take(&mut self, n: usize) -> bool {
        if self.budget >= n {
            self.budget -= n;
            true
        } else {
            false
        }
    }

    /// A random sub-store of `omega`, in store order.
    fn frame(&mut self, sc: &Scope) -> Vec<(Name, Ty)> {
        sc.omega
            .iter()
            .filter(|_| self.rng.gen_bool(0.6))
            .cloned()
            .collect()
    }

    /// Emits a sequence under `sc`. With `invariant`, no store variable
    /// changes type.
    fn seq(&mut self, sc: &mut Scope, depth: usize, invariant: bool) -> Seq {
        let gamma_len = sc.gamma.len();
        let omega_len = sc.omega.len();
        let mut items = Vec::new();
        while self.budget > 0 && self.rng.gen_bool(0.8) {
            if let Some(item) = self.item(sc, depth, invariant) {
                items.push(item);
            }
        }
        sc.gamma.truncate(gamma_len);
        sc.omega.truncate(omega_len);
        items.into_iter().rev().fold(Seq::Empty, |rest, item| match item {
            Item::Cst(y, e) => Seq::Cst(Span::default(), y, e, Box::new(rest)),
            Item::Var(y, e) => Seq::Var(Span::default(), y, e, Box::new(rest)),
            Item::Cmd(c) => Seq::cmd(c, rest),
        })
    }

    fn item(&mut self, sc: &mut Scope, depth: usize, invariant: bool) -> Option<Item> {
        match self.rng.gen_range(0..100) {
            0..=19 => {
                let targets = sc.store_vars(invariant);
                let y = (*targets.choose(self.rng)?).clone();
                if !self.take(1) {
                    return None;
                }
                let e = self.nat_expr(sc);
                sc.set(&y, STORE_NAT);
                Some(Item::Cmd(Command::Assign(y, e)))
            }
            20..=39 => {
                let y = (*sc.store_vars(true).choose(self.rng)?).clone();
                if !self.take(1) {
                    return None;
                }
                Some(Item::Cmd(if self.rng.gen_bool(0.6) {
                    Command::Inc(y)
                } else {
                    Command::Dec(y)
                }))
            }
            40..=54 if depth < self.cfg.max_depth => {
                if !self.take(1) {
                    return None;
                }
                let frame = self.frame(sc);
                let var = self.fresh("i");
                let bound = self.bound_expr(sc);
                let mut inner = Scope {
                    gamma: sc.gamma.clone(),
                    omega: frame.clone(),
                };
                inner.gamma.push((var.clone(), Ty::Nat { small: true }));
                let body = self.seq(&mut inner, depth + 1, true);
                Some(Item::Cmd(Command::For(Box::new(ForLoop {
                    var,
                    index: None,
                    bound,
                    body,
                    frame: frame_env(&frame),
                }))))
            }
            55..=64 if depth < self.cfg.max_depth => {
                if !self.take(1) {
                    return None;
                }
                let frame = self.frame(sc);
                let mut inner = Scope {
                    gamma: sc.gamma.clone(),
                    omega: frame.clone(),
                };
                let body = self.seq(&mut inner, depth + 1, invariant);
                for (x, t) in &inner.omega {
                    sc.set(x, *t);
                }
                Some(Item::Cmd(Command::Block(
                    Box::new(body),
                    QEnv::Simple(frame_env(&frame)),
                )))
            }
            65..=79 => {
                let procs: Vec<(Name, usize, usize)> = sc
                    .gamma
                    .iter()
                    .filter_map(|(x, t)| match t {
                        Ty::Proc { ins, outs } => Some((x.clone(), *ins, *outs)),
                        _ => None,
                    })
                    .collect();
                let (p, ins, outs) = procs.choose(self.rng)?.clone();
                let targets: Vec<Name> = sc.store_vars(invariant).into_iter().cloned().collect();
                if targets.len() < outs || !self.take(1) {
                    return None;
                }
                let outs: Vec<Name> = targets.choose_multiple(self.rng, outs).cloned().collect();
                let args = (0..ins).map(|_| self.nat_expr(sc)).collect();
                for z in &outs {
                    sc.set(z, STORE_NAT);
                }
                Some(Item::Cmd(Command::Call {
                    callee: Expr::var(p),
                    args,
                    outs,
                }))
            }
            80..=87 => {
                let y = self.fresh("v");
                let e = self.nat_expr(sc);
                sc.omega.push((y.clone(), STORE_NAT));
                Some(Item::Var(y, e))
            }
            88..=93 if depth < self.cfg.max_depth => {
                let gamma = sc.gamma.clone();
                let (h, ty) = self.procedure(&gamma, depth + 1)?;
                let y = self.fresh("q");
                sc.gamma.push((y.clone(), ty));
                Some(Item::Cst(y, Expr::Proc(Box::new(h))))
            }
            _ => {
                let y = self.fresh("c");
                let e = self.nat_expr(sc);
                sc.gamma.push((y.clone(), STORE_NAT));
                Some(Item::Cst(y, e))
            }
        }
    }

    /// `proc [a⃗ : nat] out [r⃗ : nat] { s }` closing over `gamma`.
    fn procedure(&mut self, gamma: &[(Name, Ty)], depth: usize) -> Option<(Header, Ty)> {
        let outs = self.rng.gen_range(1..=self.cfg.max_outputs);
        if !self.take(outs) {
            return None;
        }
        let ins = self.rng.gen_range(0..=self.cfg.max_params);
        let params: Vec<Name> = (0..ins).map(|_| self.fresh("a")).collect();
        let results: Vec<Name> = (0..outs).map(|_| self.fresh("r")).collect();
        let mut sc = Scope {
            gamma: gamma.to_vec(),
            omega: results.iter().map(|r| (r.clone(), Ty::Unit)).collect(),
        };
        sc.gamma
            .extend(params.iter().map(|a| (a.clone(), STORE_NAT)));
        // The reserved budget pays for the closing assignments.
        let body = self.seq(&mut sc, depth, false);
        self.budget += outs;
        let unset = sc.omega.iter().filter(|(_, t)| !t.is_nat()).count();
        self.budget -= unset;
        let body = self.close(body, &sc);
        let header = Header::Params {
            params: nat_env(&params),
            out: QEnv::Simple(nat_env(&results)),
            body,
        };
        Some((header, Ty::Proc { ins, outs }))
    }

    /// Appends `r := e` for every output that does not yet hold a numeral.
    fn close(&mut self, body: Seq, sc: &Scope) -> Seq {
        let unset: Vec<Name> = sc
            .omega
            .iter()
            .filter(|(_, t)| !t.is_nat())
            .map(|(r, _)| r.clone())
            .collect();
        let closing = unset
            .into_iter()
            .map(|r| Command::Assign(r, self.nat_expr(sc)))
            .collect();
        append(body, closing)
    }
}

/// Appends commands at the innermost end of `s`, inside every `cst`/`var`
/// scope so the appended commands see the same constants and store.
pub fn append(s: Seq, cs: Vec<Command>) -> Seq {
    match s {
        Seq::Empty => Seq::from_commands(cs),
        Seq::Cmd(sp, c, rest) => Seq::Cmd(sp, c, Box::new(append(*rest, cs))),
        Seq::Cst(sp, y, e, rest) => Seq::Cst(sp, y, e, Box::new(append(*rest, cs))),
        Seq::Var(sp, y, e, rest) => Seq::Var(sp, y, e, Box::new(append(*rest, cs))),
        Seq::Unpack(n, rest) => Seq::Unpack(n, Box::new(append(*rest, cs))),
        Seq::Witness(sp, i, th, rest) => Seq::Witness(sp, i, th, Box::new(append(*rest, cs))),
        Seq::Subst(sp, inner, fam, e) => Seq::Subst(sp, Box::new(append(*inner, cs)), fam, e),
    }
}

fn nat_env(xs: &[Name]) -> Env<Prop> {
    xs.iter().map(|x| (x.clone(), Prop::NatS)).collect()
}

fn frame_env(frame: &[(Name, Ty)]) -> Env<Prop> {
    frame
        .iter()
        .map(|(x, t)| {
            let p = match t {
                Ty::Nat { .. } => Prop::NatS,
                Ty::Unit => Prop::Top,
                Ty::Proc { .. } => unreachable!("procedures never enter the store"),
            };
            (x.clone(), p)
        })
        .collect()
}

/// A random well-typed program: up to `max_defs` procedure definitions
/// followed by `main`. Its size never exceeds `cfg.max_commands`.
pub fn generate_program(rng: &mut ChaCha8Rng, cfg: GenConfig) -> Program {
    let mut g = Gen {
        rng,
        cfg,
        fresh: 0,
        budget: cfg.max_commands,
    };
    let outs = g.rng.gen_range(1..=cfg.max_outputs);
    let reserved = g.take(outs);
    debug_assert!(reserved, "the size bound admits main's outputs");

    let mut gamma: Vec<(Name, Ty)> = Vec::new();
    let mut defs = Vec::new();
    let ndefs = g.rng.gen_range(0..=cfg.max_defs);
    for _ in 0..ndefs {
        if let Some((h, ty)) = g.procedure(&gamma, 1) {
            let name = g.fresh("p");
            defs.push(Definition {
                span: Span::default(),
                name: name.clone(),
                expr: Expr::Proc(Box::new(h)),
            });
            gamma.push((name, ty));
        }
    }

    let ins = g.rng.gen_range(0..=cfg.max_params);
    let params: Vec<Name> = (0..ins).map(|_| g.fresh("x")).collect();
    let results: Vec<Name> = (0..outs).map(|_| g.fresh("z")).collect();
    let mut sc = Scope {
        gamma: gamma.clone(),
        omega: results.iter().map(|r| (r.clone(), Ty::Unit)).collect(),
    };
    sc.gamma
        .extend(params.iter().map(|x| (x.clone(), Ty::Nat { small: true })));
    let body = g.seq(&mut sc, 0, false);
    g.budget += outs;
    let body = g.close(body, &sc);
    Program {
        defs,
        main: Some(Header::Params {
            params: nat_env(&params),
            out: QEnv::Simple(nat_env(&results)),
            body,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simple::{is_check_program, IsChecker};
    use crate::surface::{parse_file, print_file};

    #[test]
    fn generated_programs_are_well_typed_and_bounded() {
        let cfg = GenConfig::default();
        for k in 0..300 {
            let p = generate_program(&mut case_rng(7, k), cfg);
            assert!(program_size(&p) <= cfg.max_commands, "case {k} too large");
            if let Err(e) = is_check_program(&mut IsChecker::new(), &p) {
                let src = print_file(&SourceFile {
                    system: System::IS,
                    body: SourceBody::Program(p),
                    adjustments: vec![],
                    desugarings: vec![],
                });
                panic!("case {k} rejected: {e}\n{src}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_case() {
        let cfg = GenConfig::default();
        let a = generate_program(&mut case_rng(42, 3), cfg);
        let b = generate_program(&mut case_rng(42, 3), cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_programs_print_and_reparse() {
        let cfg = GenConfig::default();
        for k in 0..50 {
            let p = generate_program(&mut case_rng(1, k), cfg);
            let src = print_file(&SourceFile {
                system: System::IS,
                body: SourceBody::Program(p.clone()),
                adjustments: vec![],
                desugarings: vec![],
            });
            let back = parse_file(&src, None).unwrap_or_else(|e| panic!("{e}\n{src}"));
            assert_eq!(back.body, SourceBody::Program(p));
        }
    }
}
