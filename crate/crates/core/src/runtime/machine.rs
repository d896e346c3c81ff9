//! Environment machine for erased F terms: call-by-value, left to right,
//! with an explicit persistent continuation so `callcc` captures it in
//! constant time and a captured continuation may be resumed many times.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use super::erase::RTerm;
use super::RuntimeError;

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Persistent variable environment.
#[derive(Clone, Default)]
pub struct Env<'a>(Option<Rc<Binding<'a>>>);

struct Binding<'a> {
    name: &'a str,
    value: Value<'a>,
    next: Env<'a>,
}

impl<'a> Env<'a> {
    fn bind(&self, name: &'a str, value: Value<'a>) -> Self {
        Env(Some(Rc::new(Binding {
            name,
            value,
            next: self.clone(),
        })))
    }

    fn lookup(&self, x: &str) -> Option<&Value<'a>> {
        let mut cur = &self.0;
        while let Some(b) = cur {
            if b.name == x {
                return Some(&b.value);
            }
            cur = &b.next.0;
        }
        None
    }
}

#[derive(Clone)]
pub enum Param<'a> {
    One(&'a str),
    Many(&'a [String]),
}

#[derive(Clone)]
pub struct Closure<'a> {
    param: Param<'a>,
    body: &'a RTerm,
    env: Env<'a>,
}

#[derive(Clone)]
pub enum Value<'a> {
    Num(u64),
    Closure(Rc<Closure<'a>>),
    Tuple(Rc<Vec<Value<'a>>>),
    Cont(Kont<'a>),
}

/// A value detached from the machine, for reporting and comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum PlainValue {
    Num(u64),
    Tuple(Vec<PlainValue>),
    #[serde(serialize_with = "closure_tag")]
    Closure,
    #[serde(serialize_with = "cont_tag")]
    Cont,
}

fn closure_tag<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("<closure>")
}

fn cont_tag<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("<cont>")
}

impl fmt::Display for PlainValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainValue::Num(n) => write!(f, "{n}"),
            PlainValue::Closure => write!(f, "<closure>"),
            PlainValue::Cont => write!(f, "<cont>"),
            PlainValue::Tuple(vs) => {
                write!(f, "<")?;
                for (k, v) in vs.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ">")
            }
        }
    }
}

impl Value<'_> {
    pub fn to_plain(&self) -> PlainValue {
        match self {
            Value::Num(n) => PlainValue::Num(*n),
            Value::Closure(_) => PlainValue::Closure,
            Value::Cont(_) => PlainValue::Cont,
            Value::Tuple(vs) => PlainValue::Tuple(vs.iter().map(Value::to_plain).collect()),
        }
    }
}

/// Persistent continuation stack.
#[derive(Clone, Default)]
pub struct Kont<'a>(Option<Rc<(Frame<'a>, Kont<'a>)>>);

impl<'a> Kont<'a> {
    fn push(&self, f: Frame<'a>) -> Self {
        Kont(Some(Rc::new((f, self.clone()))))
    }
}

enum Frame<'a> {
    Succ,
    Pred,
    AppArg(&'a RTerm, Env<'a>),
    AppFun(Value<'a>),
    TupleAt {
        done: Vec<Value<'a>>,
        rest: &'a [RTerm],
        env: Env<'a>,
    },
    Let(&'a str, &'a RTerm, Env<'a>),
    LetMatch(&'a [String], &'a RTerm, Env<'a>),
    RecBase(&'a RTerm, &'a RTerm, Env<'a>),
    RecStep(u64, &'a RTerm, Env<'a>),
    RecStart(u64, Value<'a>),
    /// Waiting for the accumulator of iteration `k`.
    RecLoop {
        k: u64,
        n: u64,
        step: Value<'a>,
    },
    /// Waiting for `step k`, to apply it to `acc`.
    RecApply {
        acc: Value<'a>,
        k: u64,
        n: u64,
        step: Value<'a>,
    },
    Callcc,
    ThrowValue(&'a RTerm, Env<'a>),
    /// Target is a captured continuation, or a closure whose result type
    /// is falsity (it never returns normally).
    ThrowTo(Value<'a>),
}

enum State<'a> {
    Eval(&'a RTerm, Env<'a>),
    Ret(Value<'a>),
}

pub struct Machine {
    pub fuel: u64,
    pub steps: u64,
}

fn stuck(msg: impl Into<String>) -> RuntimeError {
    RuntimeError::Stuck(msg.into())
}

impl Machine {
    pub fn new(fuel: u64) -> Self {
        Machine { fuel, steps: 0 }
    }

    /// Runs a closed term to a value.
    pub fn run<'a>(&mut self, t: &'a RTerm) -> Result<Value<'a>, RuntimeError> {
        let mut state = State::Eval(t, Env::default());
        let mut kont = Kont::default();
        loop {
            self.steps += 1;
            if self.steps > self.fuel {
                return Err(RuntimeError::FuelExhausted { steps: self.fuel });
            }
            state = match state {
                State::Eval(t, env) => self.eval(t, env, &mut kont)?,
                State::Ret(v) => {
                    let Some(top) = kont.0.clone() else {
                        return Ok(v);
                    };
                    let (frame, rest) = top.as_ref();
                    kont = rest.clone();
                    self.ret(frame, v, &mut kont)?
                }
            };
        }
    }

    fn eval<'a>(
        &mut self,
        t: &'a RTerm,
        env: Env<'a>,
        kont: &mut Kont<'a>,
    ) -> Result<State<'a>, RuntimeError> {
        Ok(match t {
            RTerm::Var(x) => State::Ret(
                env.lookup(x)
                    .cloned()
                    .ok_or_else(|| stuck(format!("unbound variable `{x}`")))?,
            ),
            RTerm::Zero => State::Ret(Value::Num(0)),
            RTerm::Succ(a) => {
                *kont = kont.push(Frame::Succ);
                State::Eval(a, env)
            }
            RTerm::Pred(a) => {
                *kont = kont.push(Frame::Pred);
                State::Eval(a, env)
            }
            RTerm::Fn(x, body) => State::Ret(Value::Closure(Rc::new(Closure {
                param: Param::One(x),
                body,
                env,
            }))),
            RTerm::FnTuple(xs, body) => State::Ret(Value::Closure(Rc::new(Closure {
                param: Param::Many(xs),
                body,
                env,
            }))),
            RTerm::App(f, a) => {
                *kont = kont.push(Frame::AppArg(a, env.clone()));
                State::Eval(f, env)
            }
            RTerm::Rec(bound, base, step) => {
                *kont = kont.push(Frame::RecBase(base, step, env.clone()));
                State::Eval(bound, env)
            }
            RTerm::Tuple(ts) => match ts.split_first() {
                None => State::Ret(Value::Tuple(Rc::new(Vec::new()))),
                Some((first, rest)) => {
                    *kont = kont.push(Frame::TupleAt {
                        done: Vec::with_capacity(ts.len()),
                        rest,
                        env: env.clone(),
                    });
                    State::Eval(first, env)
                }
            },
            RTerm::Let(x, a, body) => {
                *kont = kont.push(Frame::Let(x, body, env.clone()));
                State::Eval(a, env)
            }
            RTerm::LetMatch(xs, a, body) => {
                *kont = kont.push(Frame::LetMatch(xs, body, env.clone()));
                State::Eval(a, env)
            }
            RTerm::Callcc(a) => {
                *kont = kont.push(Frame::Callcc);
                State::Eval(a, env)
            }
            RTerm::Throw(k, v) => {
                *kont = kont.push(Frame::ThrowValue(v, env.clone()));
                State::Eval(k, env)
            }
        })
    }

    fn apply<'a>(
        &mut self,
        f: Value<'a>,
        arg: Value<'a>,
        kont: &mut Kont<'a>,
    ) -> Result<State<'a>, RuntimeError> {
        match f {
            Value::Closure(c) => {
                let env = match &c.param {
                    Param::One(x) => c.env.bind(x, arg),
                    Param::Many(xs) => bind_all(&c.env, xs, arg)?,
                };
                Ok(State::Eval(c.body, env))
            }
            Value::Cont(k) => {
                *kont = k;
                Ok(State::Ret(arg))
            }
            Value::Num(_) | Value::Tuple(_) => Err(stuck("applying a non-function")),
        }
    }

    fn ret<'a>(
        &mut self,
        frame: &Frame<'a>,
        v: Value<'a>,
        kont: &mut Kont<'a>,
    ) -> Result<State<'a>, RuntimeError> {
        Ok(match frame {
            Frame::Succ => match v {
                Value::Num(n) => State::Ret(Value::Num(
                    n.checked_add(1).ok_or_else(|| stuck("numeral overflow"))?,
                )),
                _ => return Err(stuck("succ of a non-numeral")),
            },
            Frame::Pred => match v {
                Value::Num(n) => State::Ret(Value::Num(n.saturating_sub(1))),
                _ => return Err(stuck("pred of a non-numeral")),
            },
            Frame::AppArg(a, env) => {
                *kont = kont.push(Frame::AppFun(v));
                State::Eval(a, env.clone())
            }
            Frame::AppFun(f) => self.apply(f.clone(), v, kont)?,
            Frame::TupleAt { done, rest, env } => {
                let mut done = done.clone();
                done.push(v);
                match rest.split_first() {
                    None => State::Ret(Value::Tuple(Rc::new(done))),
                    Some((next, rest)) => {
                        *kont = kont.push(Frame::TupleAt {
                            done,
                            rest,
                            env: env.clone(),
                        });
                        State::Eval(next, env.clone())
                    }
                }
            }
            Frame::Let(x, body, env) => State::Eval(body, env.bind(x, v)),
            Frame::LetMatch(xs, body, env) => State::Eval(body, bind_all(env, xs, v)?),
            Frame::RecBase(base, step, env) => {
                let Value::Num(n) = v else {
                    return Err(stuck("rec bound is not a numeral"));
                };
                *kont = kont.push(Frame::RecStep(n, step, env.clone()));
                State::Eval(base, env.clone())
            }
            Frame::RecStep(n, step, env) => {
                *kont = kont.push(Frame::RecStart(*n, v));
                State::Eval(step, env.clone())
            }
            Frame::RecStart(n, acc) => {
                *kont = kont.push(Frame::RecLoop {
                    k: 0,
                    n: *n,
                    step: v,
                });
                State::Ret(acc.clone())
            }
            Frame::RecLoop { k, n, step } => {
                if k == n {
                    State::Ret(v)
                } else {
                    *kont = kont.push(Frame::RecApply {
                        acc: v,
                        k: *k,
                        n: *n,
                        step: step.clone(),
                    });
                    self.apply(step.clone(), Value::Num(*k), kont)?
                }
            }
            Frame::RecApply { acc, k, n, step } => {
                *kont = kont.push(Frame::RecLoop {
                    k: k + 1,
                    n: *n,
                    step: step.clone(),
                });
                self.apply(v, acc.clone(), kont)?
            }
            Frame::Callcc => {
                let k = Value::Cont(kont.clone());
                self.apply(v, k, kont)?
            }
            Frame::ThrowValue(a, env) => {
                if !matches!(v, Value::Cont(_) | Value::Closure(_)) {
                    return Err(stuck("throw to a non-continuation"));
                }
                *kont = kont.push(Frame::ThrowTo(v));
                State::Eval(a, env.clone())
            }
            Frame::ThrowTo(target) => self.apply(target.clone(), v, kont)?,
        })
    }
}

fn bind_all<'a>(env: &Env<'a>, xs: &'a [String], v: Value<'a>) -> Result<Env<'a>, RuntimeError> {
    let Value::Tuple(vs) = v else {
        return Err(stuck("matching a non-tuple"));
    };
    if vs.len() != xs.len() {
        return Err(stuck(format!(
            "matching {} names against a {}-tuple",
            xs.len(),
            vs.len()
        )));
    }
    Ok(xs
        .iter()
        .zip(vs.iter())
        .fold(env.clone(), |e, (x, v)| e.bind(x, v.clone())))
}

/// Evaluates a closed term within `fuel` machine steps.
pub fn evaluate(t: &RTerm, fuel: u64) -> Result<PlainValue, RuntimeError> {
    Machine::new(fuel).run(t).map(|v| v.to_plain())
}
