//! Abstract syntax for the imperative language I, the functional language F,
//! and both of their type disciplines.
//!
//! Binders are named. Equality up to renaming lives in [`crate::binding`];
//! the derived `PartialEq` impls are plain structural equality.

use std::fmt;

pub type Name = String;

/// Source position of a sequence item, used only for diagnostics.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

// Spans never participate in syntactic equality.
impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

// Consistent with `eq`: all spans hash alike.
impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// First-order arithmetic terms indexing dependent types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Individual {
    Var(Name),
    Zero,
    Succ(Box<Individual>),
    Pred(Box<Individual>),
    Add(Box<Individual>, Box<Individual>),
    Sub(Box<Individual>, Box<Individual>),
    Mult(Box<Individual>, Box<Individual>),
    F32(Box<Individual>),
}

impl Individual {
    pub fn var(name: impl Into<Name>) -> Self {
        Individual::Var(name.into())
    }

    /// The succ-chain for a numeral.
    pub fn num(n: u32) -> Self {
        (0..n).fold(Individual::Zero, |acc, _| Individual::Succ(Box::new(acc)))
    }

    pub fn succ(i: Individual) -> Self {
        Individual::Succ(Box::new(i))
    }

    pub fn pred(i: Individual) -> Self {
        Individual::Pred(Box::new(i))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Individual, b: Individual) -> Self {
        Individual::Add(Box::new(a), Box::new(b))
    }

    pub fn mult(a: Individual, b: Individual) -> Self {
        Individual::Mult(Box::new(a), Box::new(b))
    }

    pub fn f32(i: Individual) -> Self {
        Individual::F32(Box::new(i))
    }

    /// If this is `succ^k(0)`, returns `k`.
    pub fn as_numeral(&self) -> Option<u32> {
        match self {
            Individual::Zero => Some(0),
            Individual::Succ(i) => i.as_numeral().map(|k| k + 1),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Individual::Var(_) => false,
            Individual::Zero => true,
            Individual::Succ(i) | Individual::Pred(i) | Individual::F32(i) => i.is_closed(),
            Individual::Add(a, b) | Individual::Sub(a, b) | Individual::Mult(a, b) => {
                a.is_closed() && b.is_closed()
            }
        }
    }
}

/// A one-binder parametrized node `{n/X}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Abs<T> {
    pub binder: Name,
    pub body: T,
}

impl<T> Abs<T> {
    pub fn new(binder: impl Into<Name>, body: T) -> Self {
        Abs {
            binder: binder.into(),
            body,
        }
    }
}

/// Types of F: simple types and first-order formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    PropVar(Name),
    Top,
    Bottom,
    /// Unindexed `nat` of the simple discipline.
    NatS,
    Nat(Individual),
    Equals(Individual, Individual),
    Arrow(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    Forall(Name, Box<Formula>),
    Exists(Name, Box<Formula>),
    Tuple(Vec<Formula>),
}

impl Formula {
    pub fn arrow(a: Formula, b: Formula) -> Self {
        Formula::Arrow(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Self {
        Formula::Neg(Box::new(a))
    }

    pub fn forall(n: impl Into<Name>, body: Formula) -> Self {
        Formula::Forall(n.into(), Box::new(body))
    }

    pub fn exists(n: impl Into<Name>, body: Formula) -> Self {
        Formula::Exists(n.into(), Box::new(body))
    }

    pub fn nat(i: Individual) -> Self {
        Formula::Nat(i)
    }

    /// True for the simple-type sublanguage: no individuals, binders,
    /// equalities or negations.
    pub fn is_simple(&self) -> bool {
        match self {
            Formula::Top | Formula::NatS | Formula::PropVar(_) => true,
            Formula::Arrow(a, b) => a.is_simple() && b.is_simple(),
            Formula::Tuple(fs) => fs.iter().all(Formula::is_simple),
            _ => false,
        }
    }
}

/// Types of I.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prop {
    Var(Name),
    Top,
    Bottom,
    NatS,
    Nat(Individual),
    Equals(Individual, Individual),
    Proc(Box<Prototype>),
    /// Defined negation `~(ψ1, ..., ψk)`: the type of a continuation.
    Neg(Vec<Prop>),
}

impl Prop {
    /// `proc ρ`, folding `proc ~(ψ⃗)` to `~(ψ⃗)`.
    pub fn proc(rho: Prototype) -> Self {
        match rho {
            Prototype::Neg(ps) => Prop::Neg(ps),
            rho => Prop::Proc(Box::new(rho)),
        }
    }

    pub fn is_simple(&self) -> bool {
        match self {
            Prop::Top | Prop::NatS => true,
            Prop::Proc(rho) => match rho.as_ref() {
                Prototype::Sig(ps, Output::Simple(qs)) => {
                    ps.iter().all(Prop::is_simple) && qs.iter().all(Prop::is_simple)
                }
                _ => false,
            },
            _ => false,
        }
    }
}

/// Existentially quantified output types `φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    Simple(Vec<Prop>),
    Exists(Name, Box<Output>),
}

impl Output {
    /// Defined negation: `~[ψ⃗]` is `~(ψ⃗)`, and the negation of `∃n φ` is
    /// the procedure type `∀n ρ` where `proc ρ` negates `φ`.
    pub fn negation(&self) -> Prop {
        match self {
            Output::Simple(ps) => Prop::Neg(ps.clone()),
            Output::Exists(n, o) => {
                let inner = match o.negation() {
                    Prop::Neg(ps) => Prototype::Neg(ps),
                    Prop::Proc(rho) => *rho,
                    _ => unreachable!("negation is a procedure type"),
                };
                Prop::Proc(Box::new(Prototype::Forall(n.clone(), Box::new(inner))))
            }
        }
    }
}

/// Universally quantified procedure prototypes `ρ`.
///
/// `Neg` only occurs under at least one `Forall`; it is the body of the
/// negation of an existential output.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prototype {
    Sig(Vec<Prop>, Output),
    Forall(Name, Box<Prototype>),
    Neg(Vec<Prop>),
}

/// Ordered identifier environment; lookups go right to left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Env<T>(pub Vec<(Name, T)>);

impl<T> Env<T> {
    pub fn new() -> Self {
        Env(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, x: impl Into<Name>, t: T) {
        self.0.push((x.into(), t));
    }

    pub fn idents(&self) -> Vec<Name> {
        self.0.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, T)> {
        self.0.iter()
    }
}

impl<T> Default for Env<T> {
    fn default() -> Self {
        Env::new()
    }
}

impl<T> FromIterator<(Name, T)> for Env<T> {
    fn from_iter<I: IntoIterator<Item = (Name, T)>>(iter: I) -> Self {
        Env(iter.into_iter().collect())
    }
}

/// Existentially quantified environment `Θ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QEnv {
    Simple(Env<Prop>),
    Exists(Name, Box<QEnv>),
}

impl QEnv {
    pub fn simple(env: Env<Prop>) -> Self {
        QEnv::Simple(env)
    }

    /// The identifiers bound under all quantifiers.
    pub fn idents(&self) -> Vec<Name> {
        match self {
            QEnv::Simple(env) => env.idents(),
            QEnv::Exists(_, q) => q.idents(),
        }
    }
}

/// Terms of F.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Zero,
    Succ(Box<Term>),
    Pred(Box<Term>),
    Fn(Name, Formula, Box<Term>),
    /// `fn (x1:φ1, ..., xk:φk) => t`, a function over a tuple.
    FnTuple(Vec<(Name, Formula)>, Box<Term>),
    App(Box<Term>, Box<Term>),
    IndLam(Name, Box<Term>),
    IndApp(Box<Term>, Individual),
    Rec {
        bound: Box<Term>,
        base: Box<Term>,
        step: Box<Term>,
        motive: Option<Abs<Formula>>,
    },
    Tuple(Vec<Term>),
    Let(Name, Box<Term>, Box<Term>),
    LetMatch(Vec<Name>, Box<Term>, Box<Term>),
    /// `pack(i, t : ∃n φ)`.
    Pack(Individual, Box<Term>, Formula),
    /// `?n. t`, only meaningful as the body of a `let <..>` over an
    /// existential.
    Unpack(Name, Box<Term>),
    Coerce(Box<Term>, Abs<Formula>, Box<Term>),
    Axiom(Individual, Individual),
    Callcc(Box<Term>),
    Throw(Formula, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(x: impl Into<Name>) -> Self {
        Term::Var(x.into())
    }

    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn succ(t: Term) -> Self {
        Term::Succ(Box::new(t))
    }

    pub fn num(n: u32) -> Self {
        (0..n).fold(Term::Zero, |acc, _| Term::succ(acc))
    }

    pub fn let_(x: impl Into<Name>, t1: Term, t2: Term) -> Self {
        Term::Let(x.into(), Box::new(t1), Box::new(t2))
    }

    pub fn let_match(xs: Vec<Name>, t1: Term, t2: Term) -> Self {
        Term::LetMatch(xs, Box::new(t1), Box::new(t2))
    }

    pub fn tuple_of_vars(xs: &[Name]) -> Self {
        Term::Tuple(xs.iter().map(|x| Term::Var(x.clone())).collect())
    }
}

/// Expressions of I.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Star,
    Num(u32),
    /// Procedure instance `e{i}`.
    Inst(Box<Expr>, Individual),
    /// Continuation instance `e <: {n/φ}{i}`.
    ContInst(Box<Expr>, Abs<Output>, Individual),
    /// Coercion `e :> {n/ψ}[e']`.
    Coerce(Box<Expr>, Abs<Prop>, Box<Expr>),
    Axiom(Individual, Individual),
    Proc(Box<Header>),
}

impl Expr {
    pub fn var(x: impl Into<Name>) -> Self {
        Expr::Var(x.into())
    }
}

/// Procedure headers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Header {
    Params {
        params: Env<Prop>,
        out: QEnv,
        body: Seq,
    },
    Forall(Name, Box<Header>),
}

impl Header {
    /// Strips the universal binders, returning their names and the innermost
    /// parameter header.
    pub fn peel(&self) -> (Vec<&Name>, &Env<Prop>, &QEnv, &Seq) {
        let mut binders = Vec::new();
        let mut h = self;
        loop {
            match h {
                Header::Forall(n, inner) => {
                    binders.push(n);
                    h = inner;
                }
                Header::Params { params, out, body } => return (binders, params, out, body),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ForLoop {
    pub var: Name,
    /// Individual binder `n` of `for y : nat(n)`; absent in the simple form.
    pub index: Option<Name>,
    pub bound: Expr,
    pub body: Seq,
    /// Loop frame `ω`, parametrized by `index` when present.
    pub frame: Env<Prop>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Block(Box<Seq>, QEnv),
    For(Box<ForLoop>),
    Assign(Name, Expr),
    Inc(Name),
    Dec(Name),
    Call {
        callee: Expr,
        args: Vec<Expr>,
        outs: Vec<Name>,
    },
    Jump {
        target: Expr,
        args: Vec<Expr>,
        annot: QEnv,
    },
    Label {
        name: Name,
        body: Box<Seq>,
        annot: QEnv,
    },
}

/// Sequences of I.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Seq {
    Empty,
    Cmd(Span, Command, Box<Seq>),
    Cst(Span, Name, Expr, Box<Seq>),
    Var(Span, Name, Expr, Box<Seq>),
    /// `?n. s`
    Unpack(Name, Box<Seq>),
    /// `[i in Θ] s`
    Witness(Span, Individual, QEnv, Box<Seq>),
    /// `(s) :> {n/Θ}[e]`
    Subst(Span, Box<Seq>, Abs<QEnv>, Expr),
}

impl Seq {
    pub fn cmd(c: Command, rest: Seq) -> Self {
        Seq::Cmd(Span::default(), c, Box::new(rest))
    }

    pub fn from_commands(cs: Vec<Command>) -> Self {
        cs.into_iter()
            .rev()
            .fold(Seq::Empty, |rest, c| Seq::cmd(c, rest))
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            Seq::Cmd(sp, ..) | Seq::Cst(sp, ..) | Seq::Var(sp, ..) => Some(*sp),
            Seq::Witness(sp, ..) | Seq::Subst(sp, ..) => Some(*sp),
            Seq::Empty | Seq::Unpack(..) => None,
        }
    }

    /// Number of commands, counting nested bodies.
    pub fn command_count(&self) -> usize {
        match self {
            Seq::Empty => 0,
            Seq::Cmd(_, c, rest) => 1 + c.nested_count() + rest.command_count(),
            Seq::Cst(_, _, e, rest) | Seq::Var(_, _, e, rest) => {
                e.nested_count() + rest.command_count()
            }
            Seq::Unpack(_, s) | Seq::Witness(_, _, _, s) => s.command_count(),
            Seq::Subst(_, s, _, _) => s.command_count(),
        }
    }
}

impl Command {
    fn nested_count(&self) -> usize {
        match self {
            Command::Block(s, _) => s.command_count(),
            Command::For(l) => l.body.command_count(),
            Command::Label { body, .. } => body.command_count(),
            Command::Assign(_, e) => e.nested_count(),
            Command::Call { callee, args, .. } => {
                callee.nested_count() + args.iter().map(Expr::nested_count).sum::<usize>()
            }
            _ => 0,
        }
    }
}

impl Expr {
    fn nested_count(&self) -> usize {
        match self {
            Expr::Proc(h) => h.peel().3.command_count(),
            Expr::Inst(e, _) | Expr::ContInst(e, _, _) => e.nested_count(),
            Expr::Coerce(e, _, e2) => e.nested_count() + e2.nested_count(),
            _ => 0,
        }
    }
}

/// Which type discipline a file is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum System {
    IS,
    ID,
    FS,
    FD,
}

impl System {
    pub fn is_dependent(self) -> bool {
        matches!(self, System::ID | System::FD)
    }

    pub fn is_imperative(self) -> bool {
        matches!(self, System::IS | System::ID)
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            System::IS => "IS",
            System::ID => "ID",
            System::FS => "FS",
            System::FD => "FD",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "IS" => Ok(System::IS),
            "ID" => Ok(System::ID),
            "FS" => Ok(System::FS),
            "FD" => Ok(System::FD),
            other => Err(format!("unknown system `{other}`")),
        }
    }
}

/// A top-level constant definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub span: Span,
    pub name: Name,
    pub expr: Expr,
}

/// A parsed `.loop` file in one of the imperative disciplines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<Definition>,
    pub main: Option<Header>,
}

impl Program {
    /// The program as a single sequence-free expression context: the
    /// definitions in order, then the main procedure.
    pub fn main_expr(&self) -> Option<Expr> {
        self.main.clone().map(|h| Expr::Proc(Box::new(h)))
    }
}

/// Body of a source file: an imperative program or a bare F term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceBody {
    Program(Program),
    Term(Term),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub system: System,
    pub body: SourceBody,
    /// `// adjusted:` notes recording departures from a transcribed original.
    pub adjustments: Vec<String>,
    /// Parse-time desugarings worth reporting, e.g. `var y;`.
    pub desugarings: Vec<String>,
}
