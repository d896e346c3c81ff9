//! Direct big-step interpreter for jump-free I programs. It is the
//! reference the translation is tested against, so it shares no code with
//! the translator or the machine.

use std::rc::Rc;

use crate::syntax::*;

use super::machine::PlainValue;
use super::RuntimeError;

#[derive(Clone, Debug)]
pub enum IValue {
    Num(u64),
    Unit,
    Proc(Rc<ProcValue>),
}

/// A procedure closes over the constants visible at its declaration.
#[derive(Debug)]
pub struct ProcValue {
    params: Vec<Name>,
    outs: Vec<Name>,
    body: Seq,
    consts: Store,
}

impl IValue {
    /// The value the translated program computes for this one.
    pub fn to_plain(&self) -> PlainValue {
        match self {
            IValue::Num(n) => PlainValue::Num(*n),
            IValue::Unit => PlainValue::Tuple(Vec::new()),
            IValue::Proc(_) => PlainValue::Closure,
        }
    }
}

/// Ordered identifier-to-value map; lookups go right to left.
pub type Store = Vec<(Name, IValue)>;

fn lookup<'s>(store: &'s Store, x: &str) -> Option<&'s IValue> {
    store.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
}

fn assign(store: &mut Store, x: &str, v: IValue) -> Result<(), RuntimeError> {
    match store.iter_mut().rev().find(|(y, _)| y == x) {
        Some(slot) => {
            slot.1 = v;
            Ok(())
        }
        None => Err(RuntimeError::Stuck(format!("assignment to unbound `{x}`"))),
    }
}

pub struct Interpreter {
    pub fuel: u64,
    pub steps: u64,
}

fn unsupported(what: &str) -> RuntimeError {
    RuntimeError::Stuck(format!("the reference interpreter does not run {what}"))
}

impl Interpreter {
    pub fn new(fuel: u64) -> Self {
        Interpreter { fuel, steps: 0 }
    }

    fn tick(&mut self) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.fuel {
            return Err(RuntimeError::FuelExhausted { steps: self.fuel });
        }
        Ok(())
    }

    pub fn expr(&mut self, consts: &Store, store: &Store, e: &Expr) -> Result<IValue, RuntimeError> {
        self.tick()?;
        match e {
            Expr::Var(x) => lookup(store, x)
                .or_else(|| lookup(consts, x))
                .cloned()
                .ok_or_else(|| RuntimeError::Stuck(format!("unbound `{x}`"))),
            Expr::Star | Expr::Axiom(..) => Ok(IValue::Unit),
            Expr::Num(n) => Ok(IValue::Num(u64::from(*n))),
            Expr::Inst(inner, _) | Expr::Coerce(inner, _, _) => self.expr(consts, store, inner),
            Expr::ContInst(..) => Err(unsupported("continuations")),
            Expr::Proc(h) => {
                let (_, params, out, body) = h.peel();
                Ok(IValue::Proc(Rc::new(ProcValue {
                    params: params.idents(),
                    outs: out.idents(),
                    body: body.clone(),
                    consts: consts.clone(),
                })))
            }
        }
    }

    /// Calls `p` on `args`, returning its outputs in declaration order.
    pub fn call(&mut self, p: &ProcValue, args: Vec<IValue>) -> Result<Vec<IValue>, RuntimeError> {
        if args.len() != p.params.len() {
            return Err(RuntimeError::Stuck(format!(
                "expected {} arguments, found {}",
                p.params.len(),
                args.len()
            )));
        }
        let mut consts = p.consts.clone();
        consts.extend(p.params.iter().cloned().zip(args));
        let mut store: Store = p.outs.iter().map(|z| (z.clone(), IValue::Unit)).collect();
        self.seq(&mut consts, &mut store, &p.body)?;
        Ok(store.into_iter().map(|(_, v)| v).collect())
    }

    /// Runs `s`, mutating `store` in place; `consts` is restored on exit.
    pub fn seq(&mut self, consts: &mut Store, store: &mut Store, s: &Seq) -> Result<(), RuntimeError> {
        let consts_depth = consts.len();
        let store_depth = store.len();
        let mut cur = s;
        let r = loop {
            self.tick()?;
            match cur {
                Seq::Empty => break Ok(()),
                Seq::Cst(_, y, e, rest) => {
                    let v = self.expr(consts, store, e)?;
                    consts.push((y.clone(), v));
                    cur = rest;
                }
                Seq::Var(_, y, e, rest) => {
                    let v = self.expr(consts, store, e)?;
                    store.push((y.clone(), v));
                    cur = rest;
                }
                Seq::Unpack(_, rest) | Seq::Witness(_, _, _, rest) => cur = rest,
                Seq::Subst(_, inner, _, _) => cur = inner,
                Seq::Cmd(_, c, rest) => {
                    self.command(consts, store, c)?;
                    cur = rest;
                }
            }
        };
        consts.truncate(consts_depth);
        store.truncate(store_depth);
        r
    }

    fn nat(&mut self, store: &Store, y: &str) -> Result<u64, RuntimeError> {
        match lookup(store, y) {
            Some(IValue::Num(n)) => Ok(*n),
            _ => Err(RuntimeError::Stuck(format!("`{y}` does not hold a numeral"))),
        }
    }

    /// Runs `body` on the sub-store `frame`, then writes the frame back.
    fn framed(
        &mut self,
        consts: &mut Store,
        store: &mut Store,
        frame: &[Name],
        body: &Seq,
    ) -> Result<(), RuntimeError> {
        let mut inner: Store = frame
            .iter()
            .map(|x| {
                lookup(store, x)
                    .cloned()
                    .map(|v| (x.clone(), v))
                    .ok_or_else(|| RuntimeError::Stuck(format!("frame variable `{x}` unbound")))
            })
            .collect::<Result<_, _>>()?;
        self.seq(consts, &mut inner, body)?;
        for (x, v) in inner {
            assign(store, &x, v)?;
        }
        Ok(())
    }

    fn command(&mut self, consts: &mut Store, store: &mut Store, c: &Command) -> Result<(), RuntimeError> {
        match c {
            Command::Assign(y, e) => {
                let v = self.expr(consts, store, e)?;
                assign(store, y, v)
            }
            Command::Inc(y) => {
                let n = self.nat(store, y)?;
                assign(store, y, IValue::Num(n + 1))
            }
            Command::Dec(y) => {
                let n = self.nat(store, y)?;
                assign(store, y, IValue::Num(n.saturating_sub(1)))
            }
            Command::Block(body, annot) => self.framed(consts, store, &annot.idents(), body),
            Command::For(l) => {
                let n = match self.expr(consts, store, &l.bound)? {
                    IValue::Num(n) => n,
                    _ => return Err(RuntimeError::Stuck("loop bound is not a numeral".into())),
                };
                let frame = l.frame.idents();
                for k in 0..n {
                    consts.push((l.var.clone(), IValue::Num(k)));
                    let r = self.framed(consts, store, &frame, &l.body);
                    consts.pop();
                    r?;
                }
                Ok(())
            }
            Command::Call { callee, args, outs } => {
                let IValue::Proc(p) = self.expr(consts, store, callee)? else {
                    return Err(RuntimeError::Stuck("calling a non-procedure".into()));
                };
                let args = args
                    .iter()
                    .map(|a| self.expr(consts, store, a))
                    .collect::<Result<Vec<_>, _>>()?;
                let results = self.call(&p, args)?;
                for (z, v) in outs.iter().zip(results) {
                    assign(store, z, v)?;
                }
                Ok(())
            }
            Command::Jump { .. } | Command::Label { .. } => Err(unsupported("labels or jumps")),
        }
    }
}

/// Evaluates a program's definitions and returns its entry procedure.
pub fn entry_procedure(p: &Program, interp: &mut Interpreter) -> Result<Rc<ProcValue>, RuntimeError> {
    let mut consts = Store::new();
    let empty = Store::new();
    for d in &p.defs {
        let v = interp.expr(&consts, &empty, &d.expr)?;
        consts.push((d.name.clone(), v));
    }
    let entry = match &p.main {
        Some(h) => interp.expr(&consts, &empty, &Expr::Proc(Box::new(h.clone())))?,
        None => consts
            .last()
            .map(|(_, v)| v.clone())
            .ok_or_else(|| RuntimeError::Stuck("empty program".into()))?,
    };
    match entry {
        IValue::Proc(p) => Ok(p),
        _ => Err(RuntimeError::Stuck("the entry point is not a procedure".into())),
    }
}

/// Runs the entry procedure of a jump-free program on natural inputs and
/// returns its outputs as the translated program would.
pub fn interpret_i(p: &Program, inputs: &[u64], fuel: u64) -> Result<PlainValue, RuntimeError> {
    let mut interp = Interpreter::new(fuel);
    let entry = entry_procedure(p, &mut interp)?;
    let outs = interp.call(&entry, inputs.iter().map(|n| IValue::Num(*n)).collect())?;
    Ok(PlainValue::Tuple(outs.iter().map(IValue::to_plain).collect()))
}
