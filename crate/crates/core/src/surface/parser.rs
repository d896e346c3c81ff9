//! Recursive-descent parser. Ambiguities between individuals and other
//! categories (equalities, axiom expressions) are resolved by bounded
//! backtracking over the token vector.

use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::syntax::*;

type PResult<T> = Result<T, ParseError>;

const KEYWORDS: &[&str] = &[
    "system", "cst", "var", "main", "proc", "out", "forall", "exists", "top", "bot", "nat", "for",
    "until", "inc", "dec", "jump", "in", "fn", "lam", "let", "pack", "rec", "callcc", "throw",
    "succ", "pred", "add", "sub", "mult", "F32",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    desugarings: Vec<String>,
}

impl Parser {
    fn new(src: &str) -> PResult<(Parser, Vec<String>)> {
        let lexed = lex(src)?;
        Ok((
            Parser {
                toks: lexed.tokens,
                pos: 0,
                desugarings: Vec::new(),
            },
            lexed.adjustments,
        ))
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let sp = self.span();
        Err(ParseError {
            line: sp.line,
            col: sp.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&[&format!("`{}`", t.spelling())])
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["an identifier"]),
        }
    }

    /// Runs `f`; on failure rewinds and returns `None`.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Option<T> {
        let save = self.pos;
        match f(self) {
            Ok(t) => Some(t),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn comma_list<T>(
        &mut self,
        close: Tok,
        mut item: impl FnMut(&mut Parser) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(close.clone())?;
            return Ok(out);
        }
    }

    // ---- individuals ----

    fn individual(&mut self) -> PResult<Individual> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                let n = u32::try_from(n).or_else(|_| self.error(&["a small numeral"]))?;
                Ok(Individual::num(n))
            }
            Tok::Ident(s) => {
                let call = self.peek_at(1) == &Tok::LParen;
                match s.as_str() {
                    "succ" | "s" if call => {
                        self.bump();
                        Ok(Individual::succ(self.paren_individual()?))
                    }
                    "pred" => {
                        self.bump();
                        Ok(Individual::pred(self.paren_individual()?))
                    }
                    "F32" => {
                        self.bump();
                        Ok(Individual::f32(self.paren_individual()?))
                    }
                    "add" | "sub" | "mult" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let a = self.individual()?;
                        self.expect(Tok::Comma)?;
                        let b = self.individual()?;
                        self.expect(Tok::RParen)?;
                        let (a, b) = (Box::new(a), Box::new(b));
                        Ok(match s.as_str() {
                            "add" => Individual::Add(a, b),
                            "sub" => Individual::Sub(a, b),
                            _ => Individual::Mult(a, b),
                        })
                    }
                    _ => Ok(Individual::Var(self.name()?)),
                }
            }
            _ => self.error(&["an individual"]),
        }
    }

    fn paren_individual(&mut self) -> PResult<Individual> {
        self.expect(Tok::LParen)?;
        let i = self.individual()?;
        self.expect(Tok::RParen)?;
        Ok(i)
    }

    /// `i1 = i2`, or `None` with the position unchanged.
    fn try_equation(&mut self) -> Option<(Individual, Individual)> {
        self.attempt(|p| {
            let a = p.individual()?;
            p.expect(Tok::Eq)?;
            let b = p.individual()?;
            Ok((a, b))
        })
    }

    fn reject_meta_substitution(&self) -> PResult<()> {
        if self.at(&Tok::LBrack)
            && matches!(self.peek_at(1), Tok::Ident(_))
            && self.peek_at(2) == &Tok::Eq
        {
            let sp = self.span();
            return Err(ParseError {
                line: sp.line,
                col: sp.col,
                expected: vec!["a supported construct".into()],
                found: "unsupported construct: meta-substitution `[x=i]`".into(),
            });
        }
        Ok(())
    }

    // ---- I-side types ----

    fn prop(&mut self) -> PResult<Prop> {
        let p = self.prop_inner()?;
        self.reject_meta_substitution()?;
        Ok(p)
    }

    fn prop_inner(&mut self) -> PResult<Prop> {
        if let Some((a, b)) = self.try_equation() {
            return Ok(Prop::Equals(a, b));
        }
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        Ok(Prop::Neg(self.comma_list(Tok::RParen, Parser::prop)?))
                    }
                    Tok::LBrack => {
                        self.bump();
                        Ok(Prop::Neg(self.comma_list(Tok::RBrack, Parser::prop)?))
                    }
                    Tok::Ident(s) if s == "exists" => Ok(self.output()?.negation()),
                    _ => Ok(Prop::Neg(vec![self.prop_inner()?])),
                }
            }
            Tok::LParen => {
                self.bump();
                let p = self.prop()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) => match s.as_str() {
                "top" => {
                    self.bump();
                    Ok(Prop::Top)
                }
                "bot" => {
                    self.bump();
                    Ok(Prop::Bottom)
                }
                "nat" => {
                    self.bump();
                    if self.at(&Tok::LParen) {
                        Ok(Prop::Nat(self.paren_individual()?))
                    } else {
                        Ok(Prop::NatS)
                    }
                }
                "proc" => {
                    self.bump();
                    Ok(Prop::proc(self.prototype()?))
                }
                _ => Ok(Prop::Var(self.name()?)),
            },
            _ => self.error(&["a type"]),
        }
    }

    fn prototype(&mut self) -> PResult<Prototype> {
        if self.eat_kw("forall") {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Prototype::Forall(n, Box::new(self.prototype()?)));
        }
        if self.eat(&Tok::Tilde) {
            self.expect(Tok::LParen)?;
            return Ok(Prototype::Neg(self.comma_list(Tok::RParen, Parser::prop)?));
        }
        self.expect(Tok::LParen)?;
        self.expect(Tok::LBrack)?;
        let ps = self.comma_list(Tok::RBrack, Parser::prop)?;
        self.expect_kw("out")?;
        let out = self.output()?;
        self.expect(Tok::RParen)?;
        Ok(Prototype::Sig(ps, out))
    }

    fn output(&mut self) -> PResult<Output> {
        if self.eat_kw("exists") {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Output::Exists(n, Box::new(self.output()?)));
        }
        self.expect(Tok::LBrack)?;
        Ok(Output::Simple(self.comma_list(Tok::RBrack, Parser::prop)?))
    }

    fn binding(&mut self) -> PResult<(Name, Prop)> {
        let x = self.name()?;
        self.expect(Tok::Colon)?;
        Ok((x, self.prop()?))
    }

    fn env(&mut self) -> PResult<Env<Prop>> {
        self.expect(Tok::LBrack)?;
        Ok(Env(self.comma_list(Tok::RBrack, Parser::binding)?))
    }

    fn qenv(&mut self) -> PResult<QEnv> {
        if self.eat_kw("exists") {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(QEnv::Exists(n, Box::new(self.qenv()?)));
        }
        if !self.at(&Tok::LBrack) {
            return self.error(&["`[`", "`exists`"]);
        }
        Ok(QEnv::Simple(self.env()?))
    }

    fn family<T>(&mut self, body: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<Abs<T>> {
        self.expect(Tok::LBrace)?;
        let n = self.name()?;
        self.expect(Tok::Slash)?;
        let t = body(self)?;
        self.expect(Tok::RBrace)?;
        Ok(Abs::new(n, t))
    }

    // ---- I-side expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.expr_with(true)
    }

    /// `allow_inst` is off for loop bounds, where `{` opens the body.
    fn expr_with(&mut self, allow_inst: bool) -> PResult<Expr> {
        if let Some((a, b)) = self.try_equation() {
            return Ok(Expr::Axiom(a, b));
        }
        let mut e = self.expr_atom()?;
        loop {
            if allow_inst && self.eat(&Tok::LBrace) {
                let i = self.individual()?;
                self.expect(Tok::RBrace)?;
                e = Expr::Inst(Box::new(e), i);
            } else if self.eat(&Tok::ContInst) {
                let fam = self.family(Parser::output)?;
                self.expect(Tok::LBrace)?;
                let i = self.individual()?;
                self.expect(Tok::RBrace)?;
                e = Expr::ContInst(Box::new(e), fam, i);
            } else if self.eat(&Tok::Coerce) {
                let fam = self.family(Parser::prop)?;
                self.expect(Tok::LBrack)?;
                let proof = self.expr()?;
                self.expect(Tok::RBrack)?;
                e = Expr::Coerce(Box::new(e), fam, Box::new(proof));
            } else {
                return Ok(e);
            }
        }
    }

    fn numeral_expr(&mut self) -> PResult<u32> {
        match self.expr_atom()? {
            Expr::Num(k) => Ok(k),
            _ => self.error(&["a numeral"]),
        }
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Expr::Star)
            }
            Tok::Num(n) => {
                self.bump();
                let n = u32::try_from(n).or_else(|_| self.error(&["a small numeral"]))?;
                Ok(Expr::Num(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if (s == "s" || s == "succ") && self.peek_at(1) == &Tok::LParen => {
                self.bump();
                self.bump();
                let k = self.numeral_expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Num(k + 1))
            }
            Tok::Ident(s) if s == "proc" => {
                self.bump();
                Ok(Expr::Proc(Box::new(self.header()?)))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.name()?)),
            _ => self.error(&["an expression"]),
        }
    }

    fn header(&mut self) -> PResult<Header> {
        if self.eat_kw("forall") {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Header::Forall(n, Box::new(self.header()?)));
        }
        let params = self.env()?;
        self.expect_kw("out")?;
        let out = self.qenv()?;
        self.expect(Tok::LBrace)?;
        let body = self.seq()?;
        self.expect(Tok::RBrace)?;
        Ok(Header::Params { params, out, body })
    }

    // ---- sequences and commands ----

    fn at_seq_end(&self) -> bool {
        matches!(self.peek(), Tok::RBrace | Tok::RParen | Tok::Eof)
    }

    fn seq(&mut self) -> PResult<Seq> {
        let span = self.span();
        if self.at_seq_end() {
            return Ok(Seq::Empty);
        }
        if self.eat_kw("cst") {
            let y = self.name()?;
            self.expect(Tok::Eq)?;
            let e = self.expr()?;
            self.expect(Tok::Semi)?;
            return Ok(Seq::Cst(span, y, e, Box::new(self.seq()?)));
        }
        if self.eat_kw("var") {
            let y = self.name()?;
            let e = if self.eat(&Tok::Assign) {
                self.expr()?
            } else {
                self.desugarings
                    .push(format!("{span}: `var {y};` read as `var {y} := *;`"));
                Expr::Star
            };
            self.expect(Tok::Semi)?;
            return Ok(Seq::Var(span, y, e, Box::new(self.seq()?)));
        }
        if self.eat(&Tok::Question) {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Seq::Unpack(n, Box::new(self.seq()?)));
        }
        if self.eat(&Tok::LBrack) {
            let i = self.individual()?;
            self.expect_kw("in")?;
            let theta = self.qenv()?;
            self.expect(Tok::RBrack)?;
            return Ok(Seq::Witness(span, i, theta, Box::new(self.seq()?)));
        }
        if self.eat(&Tok::LParen) {
            let s = self.seq()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Coerce)?;
            let fam = self.family(Parser::qenv)?;
            self.expect(Tok::LBrack)?;
            let e = self.expr()?;
            self.expect(Tok::RBrack)?;
            self.eat(&Tok::Semi);
            if !self.at_seq_end() {
                return self.error(&["end of sequence after a sequence coercion"]);
            }
            return Ok(Seq::Subst(span, Box::new(s), fam, e));
        }
        let c = self.command()?;
        Ok(Seq::Cmd(span, c, Box::new(self.seq()?)))
    }

    fn command(&mut self) -> PResult<Command> {
        if self.eat(&Tok::LBrace) {
            let s = self.seq()?;
            self.expect(Tok::RBrace)?;
            let theta = self.qenv()?;
            self.eat(&Tok::Semi);
            return Ok(Command::Block(Box::new(s), theta));
        }
        if self.eat_kw("for") {
            return self.for_loop();
        }
        for (kw, inc) in [("inc", true), ("dec", false)] {
            if self.eat_kw(kw) {
                self.expect(Tok::LParen)?;
                let y = self.name()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                return Ok(if inc { Command::Inc(y) } else { Command::Dec(y) });
            }
        }
        if self.eat_kw("jump") {
            self.expect(Tok::LParen)?;
            let target = self.expr()?;
            let mut args = Vec::new();
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
            let annot = self.qenv()?;
            self.expect(Tok::Semi)?;
            return Ok(Command::Jump {
                target,
                args,
                annot,
            });
        }
        if let Tok::Ident(x) = self.peek().clone() {
            if !is_keyword(&x) {
                if self.peek_at(1) == &Tok::Assign {
                    self.bump();
                    self.bump();
                    let e = self.expr()?;
                    self.expect(Tok::Semi)?;
                    return Ok(Command::Assign(x, e));
                }
                if self.peek_at(1) == &Tok::Colon && self.peek_at(2) == &Tok::LBrace {
                    self.bump();
                    self.bump();
                    self.bump();
                    let body = self.seq()?;
                    self.expect(Tok::RBrace)?;
                    let annot = self.qenv()?;
                    self.eat(&Tok::Semi);
                    return Ok(Command::Label {
                        name: x,
                        body: Box::new(body),
                        annot,
                    });
                }
            }
        }
        let callee = if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::LParen {
            Expr::Var(self.name()?)
        } else {
            self.expr()?
        };
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.at(&Tok::Semi) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Semi)?;
        let outs = self.comma_list(Tok::RParen, Parser::name)?;
        self.expect(Tok::Semi)?;
        Ok(Command::Call { callee, args, outs })
    }

    fn for_loop(&mut self) -> PResult<Command> {
        let var = self.name()?;
        let index = if self.eat(&Tok::Colon) {
            self.expect_kw("nat")?;
            self.expect(Tok::LParen)?;
            let n = self.name()?;
            self.expect(Tok::RParen)?;
            Some(n)
        } else {
            None
        };
        self.expect(Tok::Assign)?;
        if !self.eat(&Tok::Num(0)) {
            return self.error(&["`0`"]);
        }
        self.expect_kw("until")?;
        let bound = self.expr_with(false)?;
        self.expect(Tok::LBrace)?;
        let body = self.seq()?;
        self.expect(Tok::RBrace)?;
        self.eat(&Tok::Underscore);
        let frame = self.env()?;
        self.eat(&Tok::Semi);
        Ok(Command::For(Box::new(ForLoop {
            var,
            index,
            bound,
            body,
            frame,
        })))
    }

    // ---- F-side ----

    fn formula(&mut self) -> PResult<Formula> {
        let f = self.formula_inner()?;
        self.reject_meta_substitution()?;
        Ok(f)
    }

    fn formula_inner(&mut self) -> PResult<Formula> {
        for (kw, forall) in [("forall", true), ("exists", false)] {
            if self.eat_kw(kw) {
                let n = self.name()?;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                return Ok(if forall {
                    Formula::forall(n, body)
                } else {
                    Formula::exists(n, body)
                });
            }
        }
        let lhs = self.formula_unary()?;
        if self.eat(&Tok::Arrow) {
            return Ok(Formula::arrow(lhs, self.formula()?));
        }
        Ok(lhs)
    }

    fn formula_unary(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Tilde) {
            if self.at_kw("forall") || self.at_kw("exists") {
                return Ok(Formula::neg(self.formula_inner()?));
            }
            return Ok(Formula::neg(self.formula_unary()?));
        }
        self.formula_atom()
    }

    fn formula_atom(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.eat(&Tok::Lt) {
            return Ok(Formula::Tuple(self.comma_list(Tok::Gt, Parser::formula)?));
        }
        if let Some((a, b)) = self.try_equation() {
            return Ok(Formula::Equals(a, b));
        }
        match self.peek().clone() {
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Ident(s) if s == "nat" => {
                self.bump();
                if self.at(&Tok::LParen) {
                    Ok(Formula::Nat(self.paren_individual()?))
                } else {
                    Ok(Formula::NatS)
                }
            }
            Tok::Ident(_) => Ok(Formula::PropVar(self.name()?)),
            _ => self.error(&["a formula"]),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        if self.eat_kw("fn") {
            if self.eat(&Tok::LParen) {
                let params = self.comma_list(Tok::RParen, |p| {
                    let x = p.name()?;
                    p.expect(Tok::Colon)?;
                    Ok((x, p.formula()?))
                })?;
                self.expect(Tok::FatArrow)?;
                return Ok(Term::FnTuple(params, Box::new(self.term()?)));
            }
            let x = self.name()?;
            self.expect(Tok::Colon)?;
            let f = self.formula()?;
            self.expect(Tok::FatArrow)?;
            return Ok(Term::Fn(x, f, Box::new(self.term()?)));
        }
        if self.eat_kw("lam") {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Term::IndLam(n, Box::new(self.term()?)));
        }
        if self.eat_kw("let") {
            if self.eat(&Tok::Lt) {
                let xs = self.comma_list(Tok::Gt, Parser::name)?;
                self.expect(Tok::Eq)?;
                let t1 = self.term()?;
                self.expect_kw("in")?;
                return Ok(Term::let_match(xs, t1, self.term()?));
            }
            let x = self.name()?;
            self.expect(Tok::Eq)?;
            let t1 = self.term()?;
            self.expect_kw("in")?;
            return Ok(Term::let_(x, t1, self.term()?));
        }
        if self.eat(&Tok::Question) {
            let n = self.name()?;
            self.expect(Tok::Dot)?;
            return Ok(Term::Unpack(n, Box::new(self.term()?)));
        }
        if self.eat_kw("callcc") {
            return Ok(Term::Callcc(Box::new(self.term_postfix()?)));
        }
        if self.eat_kw("throw") {
            self.expect(Tok::LBrack)?;
            let f = self.formula()?;
            self.expect(Tok::RBrack)?;
            let k = self.term_postfix()?;
            let v = self.term_postfix()?;
            return Ok(Term::Throw(f, Box::new(k), Box::new(v)));
        }
        let mut t = self.term_postfix()?;
        while self.starts_term_atom() {
            let a = self.term_postfix()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn starts_term_atom(&self) -> bool {
        match self.peek() {
            Tok::Num(_) | Tok::LParen | Tok::Lt => true,
            Tok::Ident(s) => {
                !is_keyword(s) || matches!(s.as_str(), "succ" | "pred" | "pack" | "rec")
            }
            _ => false,
        }
    }

    fn term_postfix(&mut self) -> PResult<Term> {
        let mut t = self.term_atom()?;
        loop {
            if self.eat(&Tok::LBrace) {
                let i = self.individual()?;
                self.expect(Tok::RBrace)?;
                t = Term::IndApp(Box::new(t), i);
            } else if self.eat(&Tok::Coerce) {
                let fam = self.family(Parser::formula)?;
                self.expect(Tok::LBrack)?;
                let proof = match self.try_equation() {
                    Some((a, b)) => Term::Axiom(a, b),
                    None => self.term()?,
                };
                self.expect(Tok::RBrack)?;
                t = Term::Coerce(Box::new(t), fam, Box::new(proof));
            } else {
                return Ok(t);
            }
        }
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                let n = u32::try_from(n).or_else(|_| self.error(&["a small numeral"]))?;
                Ok(Term::num(n))
            }
            Tok::Lt => {
                self.bump();
                Ok(Term::Tuple(self.comma_list(Tok::Gt, Parser::term)?))
            }
            Tok::LParen => {
                self.bump();
                if let Some((a, b)) = self.attempt(|p| {
                    let a = p.individual()?;
                    p.expect(Tok::Eq)?;
                    let b = p.individual()?;
                    p.expect(Tok::RParen)?;
                    Ok((a, b))
                }) {
                    return Ok(Term::Axiom(a, b));
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) => match s.as_str() {
                "succ" | "s" if self.peek_at(1) == &Tok::LParen => {
                    self.bump();
                    self.bump();
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::succ(t))
                }
                "pred" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::Pred(Box::new(t)))
                }
                "pack" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let i = self.individual()?;
                    self.expect(Tok::Comma)?;
                    let t = self.term()?;
                    self.expect(Tok::Colon)?;
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::Pack(i, Box::new(t), f))
                }
                "rec" => {
                    self.bump();
                    let motive = if self.eat(&Tok::LBrace) {
                        let n = self.name()?;
                        self.expect(Tok::Dot)?;
                        let f = self.formula()?;
                        self.expect(Tok::RBrace)?;
                        Some(Abs::new(n, f))
                    } else {
                        None
                    };
                    self.expect(Tok::LParen)?;
                    let bound = self.term()?;
                    self.expect(Tok::Comma)?;
                    let base = self.term()?;
                    self.expect(Tok::Comma)?;
                    let step = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::Rec {
                        bound: Box::new(bound),
                        base: Box::new(base),
                        step: Box::new(step),
                        motive,
                    })
                }
                _ => Ok(Term::Var(self.name()?)),
            },
            _ => self.error(&["a term"]),
        }
    }

    // ---- files ----

    fn file(&mut self, adjustments: Vec<String>, force: Option<System>) -> PResult<SourceFile> {
        self.expect_kw("system")?;
        let sys_span = self.span();
        let declared = match self.bump() {
            Tok::Ident(s) => s.parse::<System>().map_err(|_| ParseError {
                line: sys_span.line,
                col: sys_span.col,
                expected: vec!["IS".into(), "ID".into(), "FS".into(), "FD".into()],
                found: format!("`{s}`"),
            })?,
            other => {
                return Err(ParseError {
                    line: sys_span.line,
                    col: sys_span.col,
                    expected: vec!["a discipline".into()],
                    found: other.describe(),
                })
            }
        };
        self.expect(Tok::Semi)?;
        let system = force.unwrap_or(declared);
        let body = if system.is_imperative() {
            let mut defs = Vec::new();
            let mut main = None;
            loop {
                let span = self.span();
                if self.eat_kw("cst") {
                    let name = self.name()?;
                    self.expect(Tok::Eq)?;
                    let expr = self.expr()?;
                    self.expect(Tok::Semi)?;
                    defs.push(Definition { span, name, expr });
                } else if main.is_none() && self.eat_kw("main") {
                    main = Some(self.header()?);
                    self.eat(&Tok::Semi);
                } else if self.at(&Tok::Eof) {
                    break;
                } else {
                    return self.error(&["`cst`", "`main`", "end of input"]);
                }
            }
            SourceBody::Program(Program { defs, main })
        } else {
            let t = self.term()?;
            self.eat(&Tok::Semi);
            SourceBody::Term(t)
        };
        if !self.at(&Tok::Eof) {
            return self.error(&["end of input"]);
        }
        Ok(SourceFile {
            system,
            body,
            adjustments,
            desugarings: std::mem::take(&mut self.desugarings),
        })
    }
}

fn complete<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let (mut p, _) = Parser::new(src)?;
    let t = f(&mut p)?;
    if !p.at(&Tok::Eof) {
        return p.error(&["end of input"]);
    }
    Ok(t)
}

/// Parses a whole file; `force` overrides its discipline directive.
pub fn parse_file(src: &str, force: Option<System>) -> PResult<SourceFile> {
    let (mut p, adjustments) = Parser::new(src)?;
    p.file(adjustments, force)
}

pub fn parse_term(src: &str) -> PResult<Term> {
    complete(src, Parser::term)
}

pub fn parse_formula(src: &str) -> PResult<Formula> {
    complete(src, Parser::formula)
}

pub fn parse_prop(src: &str) -> PResult<Prop> {
    complete(src, Parser::prop)
}

pub fn parse_individual(src: &str) -> PResult<Individual> {
    complete(src, Parser::individual)
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    complete(src, Parser::expr)
}

pub fn parse_seq(src: &str) -> PResult<Seq> {
    complete(src, Parser::seq)
}

pub fn parse_qenv(src: &str) -> PResult<QEnv> {
    complete(src, Parser::qenv)
}

pub fn parse_output(src: &str) -> PResult<Output> {
    complete(src, Parser::output)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_document_lists_every_keyword() {
        let ebnf = include_str!("../../../../docs/grammar.ebnf");
        for kw in KEYWORDS {
            assert!(ebnf.contains(&format!("\"{kw}\"")), "docs/grammar.ebnf lacks {kw}");
        }
    }

    #[test]
    fn digits_are_succ_chains() {
        assert_eq!(parse_individual("2").unwrap(), Individual::num(2));
        assert_eq!(parse_individual("s(s(0))").unwrap(), Individual::num(2));
    }

    #[test]
    fn empty_sequence() {
        assert_eq!(parse_seq("").unwrap(), Seq::Empty);
    }

    #[test]
    fn simple_proc() {
        let e = parse_expr("proc [x:nat] out [y:nat] { y := x; }").unwrap();
        let Expr::Proc(h) = e else { panic!() };
        let (binders, params, out, body) = h.peel();
        assert!(binders.is_empty());
        assert_eq!(params.len(), 1);
        assert_eq!(out.idents(), vec!["y".to_string()]);
        assert_eq!(body.command_count(), 1);
    }

    #[test]
    fn negation_forms() {
        assert_eq!(
            parse_prop("~nat(0)").unwrap(),
            Prop::Neg(vec![Prop::Nat(Individual::Zero)])
        );
        assert_eq!(
            parse_prop("~(nat(0), top)").unwrap(),
            Prop::Neg(vec![Prop::Nat(Individual::Zero), Prop::Top])
        );
        let p = parse_prop("~exists u.[nat(u)]").unwrap();
        assert_eq!(p, parse_prop("proc forall u. ~(nat(u))").unwrap());
    }

    #[test]
    fn equality_prop() {
        assert_eq!(
            parse_prop("add(0, m) = m").unwrap(),
            Prop::Equals(
                Individual::add(Individual::Zero, Individual::var("m")),
                Individual::var("m")
            )
        );
    }

    #[test]
    fn meta_substitution_is_rejected() {
        let err = parse_formula("nat(n)[x = 0]").unwrap_err();
        assert!(err.found.contains("unsupported construct"));
    }

    #[test]
    fn var_without_initializer_desugars() {
        let f = parse_file("system IS; main [] out [] { var y; }", None).unwrap();
        assert_eq!(f.desugarings.len(), 1);
        let SourceBody::Program(p) = f.body else { panic!() };
        let (_, _, _, body) = p.main.as_ref().unwrap().peel();
        assert!(matches!(body, Seq::Var(_, _, Expr::Star, _)));
    }

    #[test]
    fn both_loop_forms_agree() {
        let a = parse_seq("for i := 0 until x { inc(z); }[z:nat];").unwrap();
        let b = parse_seq("for i := 0 until x { inc(z); }_[z:nat]").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn terms() {
        let t = parse_term("fn x : nat => succ(x)").unwrap();
        assert_eq!(
            t,
            Term::Fn("x".into(), Formula::NatS, Box::new(Term::succ(Term::var("x"))))
        );
        let t = parse_term("f a b").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"))
        );
        let t = parse_term("z :> {i/nat(i)}[add(0, m) = m]").unwrap();
        assert!(matches!(t, Term::Coerce(_, _, ref p) if matches!(**p, Term::Axiom(..))));
    }

    #[test]
    fn arrows_associate_right() {
        let f = parse_formula("nat -> nat -> nat").unwrap();
        assert_eq!(
            f,
            Formula::arrow(Formula::NatS, Formula::arrow(Formula::NatS, Formula::NatS))
        );
    }

    #[test]
    fn error_position() {
        let e = parse_file("system IS;\nmain [] out [] { x := ; }", None).unwrap_err();
        assert_eq!((e.line, e.col), (2, 23));
    }
}
