//! Probabilistic big-step evaluation.
//!
//! Closed, elaborated terms are run on a call-by-name environment machine:
//! arguments become unevaluated thunks and are re-evaluated at every use, so
//! a measurement inside an argument is performed once per use. Circuit
//! evaluation, reversal and measurement follow the big-step rules, with the
//! operands of `||` swapped in the result.
//!
//! [`eval_sample`] follows one derivation, drawing measurement outcomes from
//! a seeded source. [`eval_dist`] explores every outcome of every
//! measurement and returns the resulting distribution over values.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::ast::{IndexOp, Term};
use crate::circuit::{CircuitError, CircuitValue};
use crate::qsim::{circuit_eval, sample_measure, GateRegistry, MeasureDistribution, SimError, DEFAULT_MAX_WIRES};

pub const DEFAULT_FUEL: u64 = 1_000_000;
pub const DEFAULT_MAX_BRANCH_DEPTH: u32 = 64;
pub const DEFAULT_MASS_EPS: f64 = 1e-12;
/// `set` refuses bit positions at or above this.
pub const MAX_SET_BIT: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Machine steps allowed along one derivation.
    pub fuel: u64,
    /// Measurements allowed along one branch of `eval_dist`.
    pub max_branch_depth: u32,
    /// Branches less likely than this are not explored further.
    pub mass_eps: f64,
    pub max_wires: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            fuel: DEFAULT_FUEL,
            max_branch_depth: DEFAULT_MAX_BRANCH_DEPTH,
            mass_eps: DEFAULT_MASS_EPS,
            max_wires: DEFAULT_MAX_WIRES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Num(BigUint),
    Circuit(CircuitValue),
}

impl Value {
    pub fn num(n: u64) -> Value {
        Value::Num(BigUint::from(n))
    }

    pub fn as_num(&self) -> Option<&BigUint> {
        match self {
            Value::Num(n) => Some(n),
            Value::Circuit(_) => None,
        }
    }

    pub fn as_circuit(&self) -> Option<&CircuitValue> {
        match self {
            Value::Circuit(c) => Some(c),
            Value::Num(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Circuit(c) => write!(f, "{c}"),
        }
    }
}

/// One derivation `M ⇓^p V`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub value: Value,
    pub probability: f64,
}

/// Values with their probability mass, plus the mass lost to divergence and
/// to exploration cut-offs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    pub masses: BTreeMap<Value, f64>,
    pub residual: f64,
}

impl Distribution {
    pub fn mass(&self, v: &Value) -> f64 {
        self.masses.get(v).copied().unwrap_or(0.0)
    }

    /// Stored mass plus residual.
    pub fn total(&self) -> f64 {
        self.masses.values().sum::<f64>() + self.residual
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("evaluation diverged: no value after {steps} steps")]
    Divergence { steps: u64 },
    #[error("evaluation is stuck: {0}")]
    Stuck(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("resource limit: {0}")]
    Resource(String),
}

fn stuck(what: impl Into<String>) -> EvalError {
    EvalError::Stuck(what.into())
}

/// Bit `n` of `m`, bit 0 being the rightmost.
pub fn get_bit(m: &BigUint, n: &BigUint) -> BigUint {
    match n.to_u64() {
        Some(n) if m.bit(n) => BigUint::one(),
        _ => BigUint::zero(),
    }
}

/// `m` with bit `n` forced to 1.
pub fn set_bit(m: &BigUint, n: &BigUint) -> Result<BigUint, EvalError> {
    let n = n
        .to_u64()
        .filter(|&n| n < MAX_SET_BIT)
        .ok_or_else(|| EvalError::Resource(format!("bit position {n} is too large")))?;
    let mut out = m.clone();
    out.set_bit(n, true);
    Ok(out)
}

// ---------------------------------------------------------------------------
// The machine

type Env<'a> = Option<Rc<EnvNode<'a>>>;

struct EnvNode<'a> {
    name: &'a str,
    value: Option<Rc<Thunk<'a>>>,
    next: Env<'a>,
}

enum Thunk<'a> {
    Code(&'a Term, Env<'a>),
    /// `Y M`, unfolded when forced.
    Fix(Rc<Thunk<'a>>),
}

// Environments form long chains in deep recursions; dismantle them without
// recursing.
impl Drop for EnvNode<'_> {
    fn drop(&mut self) {
        let mut envs: Vec<Rc<EnvNode<'_>>> = Vec::new();
        let mut thunks: Vec<Rc<Thunk<'_>>> = Vec::new();
        envs.extend(self.next.take());
        thunks.extend(self.value.take());
        loop {
            if let Some(t) = thunks.pop() {
                if let Ok(t) = Rc::try_unwrap(t) {
                    match t {
                        Thunk::Code(_, mut env) => envs.extend(env.take()),
                        Thunk::Fix(m) => thunks.push(m),
                    }
                }
            } else if let Some(e) = envs.pop() {
                if let Ok(mut node) = Rc::try_unwrap(e) {
                    envs.extend(node.next.take());
                    thunks.extend(node.value.take());
                }
            } else {
                break;
            }
        }
    }
}

fn bind<'a>(env: &Env<'a>, name: &'a str, value: Rc<Thunk<'a>>) -> Env<'a> {
    Some(Rc::new(EnvNode {
        name,
        value: Some(value),
        next: env.clone(),
    }))
}

fn lookup<'a>(env: &Env<'a>, name: &str) -> Option<Rc<Thunk<'a>>> {
    let mut cur = env.as_ref();
    while let Some(node) = cur {
        if node.name == name {
            return node.value.clone();
        }
        cur = node.next.as_ref();
    }
    None
}

#[derive(Clone)]
enum Frame<'a> {
    Succ,
    Pred,
    BitArg { set: bool, n: Rc<Thunk<'a>> },
    BitApply { set: bool, m: BigUint },
    If { l: &'a Term, r: &'a Term, env: Env<'a>, args: Vec<Rc<Thunk<'a>>> },
    OpArg { op: IndexOp, rhs: &'a Term, env: Env<'a> },
    OpApply { op: IndexOp, lhs: BigUint },
    SeqArg { rhs: &'a Term, env: Env<'a> },
    SeqApply(CircuitValue),
    ParArg { rhs: &'a Term, env: Env<'a> },
    ParApply(CircuitValue),
    IterBase { base: &'a Term, rep: &'a Term, env: Env<'a> },
    IterRep { n: u64, rep: &'a Term, env: Env<'a> },
    IterApply { n: u64, base: CircuitValue },
    Reverse,
    MeasCircuit { circuit: &'a Term, index: &'a Term, env: Env<'a> },
    MeasIndex { state: BigUint, index: &'a Term, env: Env<'a> },
    MeasRun { state: BigUint, circuit: CircuitValue },
}

#[derive(Clone)]
enum Focus<'a> {
    Eval(&'a Term, Env<'a>),
    Force(Rc<Thunk<'a>>),
    Return(Value),
}

enum Pause {
    Done(Value),
    Measure(MeasureDistribution),
}

#[derive(Clone)]
struct Machine<'a> {
    focus: Option<Focus<'a>>,
    args: Vec<Rc<Thunk<'a>>>,
    stack: Vec<Frame<'a>>,
    probability: f64,
    steps: u64,
    measurements: u32,
}

struct Context<'r> {
    gates: &'r GateRegistry,
    config: EvalConfig,
}

impl<'a> Machine<'a> {
    fn new(t: &'a Term) -> Self {
        Machine {
            focus: Some(Focus::Eval(t, None)),
            args: Vec::new(),
            stack: Vec::new(),
            probability: 1.0,
            steps: 0,
            measurements: 0,
        }
    }

    fn resume(&mut self, outcome: u64, probability: f64) {
        self.probability *= probability;
        self.measurements += 1;
        self.focus = Some(Focus::Return(Value::num(outcome)));
    }

    fn run(&mut self, cx: &Context<'_>) -> Result<Pause, EvalError> {
        loop {
            self.steps += 1;
            if self.steps > cx.config.fuel {
                return Err(EvalError::Divergence { steps: cx.config.fuel });
            }
            match self.focus.take().expect("machine has a focus") {
                Focus::Eval(t, env) => self.eval(cx, t, env)?,
                Focus::Force(th) => match &*th {
                    Thunk::Code(t, env) => self.focus = Some(Focus::Eval(t, env.clone())),
                    Thunk::Fix(m) => {
                        self.args.push(th.clone());
                        self.focus = Some(Focus::Force(m.clone()));
                    }
                },
                Focus::Return(v) => match self.stack.pop() {
                    None => return Ok(Pause::Done(v)),
                    Some(frame) => {
                        if let Some(dist) = self.ret(cx, frame, v)? {
                            return Ok(Pause::Measure(dist));
                        }
                    }
                },
            }
        }
    }

    fn take_args(&mut self, n: usize, what: &str) -> Result<Vec<Rc<Thunk<'a>>>, EvalError> {
        if self.args.len() != n {
            return Err(stuck(format!("`{what}` applied to {} arguments", self.args.len())));
        }
        let mut out = std::mem::take(&mut self.args);
        out.reverse();
        Ok(out)
    }

    fn ground(&self, what: &str) -> Result<(), EvalError> {
        if self.args.is_empty() {
            Ok(())
        } else {
            Err(stuck(format!("{what} applied to arguments")))
        }
    }

    fn eval(&mut self, cx: &Context<'_>, t: &'a Term, env: Env<'a>) -> Result<(), EvalError> {
        let focus = |f: Focus<'a>| Some(f);
        let next = match t {
            Term::Located(_, inner) => focus(Focus::Eval(inner, env)),
            Term::Var(x) => {
                let th = lookup(&env, x).ok_or_else(|| stuck(format!("free variable `{x}`")))?;
                focus(Focus::Force(th))
            }
            Term::App(f, a) => {
                self.args.push(Rc::new(Thunk::Code(a, env.clone())));
                focus(Focus::Eval(f, env))
            }
            Term::Lam(x, _, body) => {
                let arg = self.args.pop().ok_or_else(|| stuck("a function is not a ground value"))?;
                focus(Focus::Eval(body, bind(&env, x, arg)))
            }
            Term::Fix(_) => {
                let m = self.args.pop().ok_or_else(|| stuck("`fix` without an argument"))?;
                self.args.push(Rc::new(Thunk::Fix(m.clone())));
                focus(Focus::Force(m))
            }
            Term::Succ | Term::Pred => {
                let a = self.take_args(1, if matches!(t, Term::Succ) { "succ" } else { "pred" })?;
                self.stack.push(if matches!(t, Term::Succ) { Frame::Succ } else { Frame::Pred });
                focus(Focus::Force(a[0].clone()))
            }
            Term::Get | Term::Set => {
                let set = matches!(t, Term::Set);
                let a = self.take_args(2, if set { "set" } else { "get" })?;
                self.stack.push(Frame::BitArg { set, n: a[1].clone() });
                focus(Focus::Force(a[0].clone()))
            }
            Term::If(c, l, r) => {
                let args = std::mem::take(&mut self.args);
                self.stack.push(Frame::If { l, r, env: env.clone(), args });
                focus(Focus::Eval(c, env))
            }
            Term::Num(n) => {
                self.ground("a numeral")?;
                focus(Focus::Return(Value::Num(n.clone())))
            }
            Term::Gate(g) => {
                self.ground("a gate")?;
                let k = cx
                    .gates
                    .arity_class(g)
                    .ok_or_else(|| SimError::UnknownGate(g.clone()))?;
                focus(Focus::Return(Value::Circuit(CircuitValue::gate(g.clone(), u64::from(k) + 1))))
            }
            Term::Seq(x, y) => {
                self.ground("a circuit")?;
                self.stack.push(Frame::SeqArg { rhs: y, env: env.clone() });
                focus(Focus::Eval(x, env))
            }
            Term::Par(x, y) => {
                self.ground("a circuit")?;
                self.stack.push(Frame::ParArg { rhs: y, env: env.clone() });
                focus(Focus::Eval(x, env))
            }
            Term::Iter(n, base, rep) => {
                self.ground("a circuit")?;
                self.stack.push(Frame::IterBase { base, rep, env: env.clone() });
                focus(Focus::Eval(n, env))
            }
            Term::Reverse(x) => {
                self.ground("a circuit")?;
                self.stack.push(Frame::Reverse);
                focus(Focus::Eval(x, env))
            }
            Term::Op(op, x, y) => {
                self.ground("a number")?;
                self.stack.push(Frame::OpArg { op: *op, rhs: y, env: env.clone() });
                focus(Focus::Eval(x, env))
            }
            Term::Size(_, slot) => {
                self.ground("a number")?;
                let e = slot.as_ref().ok_or_else(|| stuck("`size` without a resolved index"))?;
                focus(Focus::Eval(e, env))
            }
            Term::DMeas(state, circuit, slot) => {
                self.ground("a number")?;
                let index = slot.as_ref().ok_or_else(|| stuck("`dmeas` without a resolved index"))?;
                self.stack.push(Frame::MeasCircuit { circuit, index, env: env.clone() });
                focus(Focus::Eval(state, env))
            }
        };
        self.focus = next;
        Ok(())
    }

    fn ret(&mut self, cx: &Context<'_>, frame: Frame<'a>, v: Value) -> Result<Option<MeasureDistribution>, EvalError> {
        let num = |v: Value| match v {
            Value::Num(n) => Ok(n),
            Value::Circuit(c) => Err(stuck(format!("circuit `{c}` where a number was expected"))),
        };
        let circ = |v: Value| match v {
            Value::Circuit(c) => Ok(c),
            Value::Num(n) => Err(stuck(format!("number {n} where a circuit was expected"))),
        };
        let small = |n: BigUint, what: &str| {
            n.to_u64()
                .ok_or_else(|| EvalError::Resource(format!("{what} {n} is too large")))
        };
        let next = match frame {
            Frame::Succ => Focus::Return(Value::Num(num(v)? + 1u32)),
            Frame::Pred => {
                let n = num(v)?;
                Focus::Return(Value::Num(if n.is_zero() { n } else { n - 1u32 }))
            }
            Frame::BitArg { set, n } => {
                self.stack.push(Frame::BitApply { set, m: num(v)? });
                Focus::Force(n)
            }
            Frame::BitApply { set, m } => {
                let n = num(v)?;
                let out = if set { set_bit(&m, &n)? } else { get_bit(&m, &n) };
                Focus::Return(Value::Num(out))
            }
            Frame::If { l, r, env, args } => {
                self.args = args;
                Focus::Eval(if num(v)?.is_zero() { l } else { r }, env)
            }
            Frame::OpArg { op, rhs, env } => {
                self.stack.push(Frame::OpApply { op, lhs: num(v)? });
                Focus::Eval(rhs, env)
            }
            Frame::OpApply { op, lhs } => {
                let rhs = num(v)?;
                Focus::Return(Value::Num(match op {
                    IndexOp::Add => lhs + rhs,
                    IndexOp::Mul => lhs * rhs,
                }))
            }
            Frame::SeqArg { rhs, env } => {
                self.stack.push(Frame::SeqApply(circ(v)?));
                Focus::Eval(rhs, env)
            }
            Frame::SeqApply(first) => Focus::Return(Value::Circuit(CircuitValue::seq(first, circ(v)?)?)),
            Frame::ParArg { rhs, env } => {
                self.stack.push(Frame::ParApply(circ(v)?));
                Focus::Eval(rhs, env)
            }
            Frame::ParApply(left) => Focus::Return(Value::Circuit(CircuitValue::par(circ(v)?, left)?)),
            Frame::IterBase { base, rep, env } => {
                let n = small(num(v)?, "iteration count")?;
                self.stack.push(Frame::IterRep { n, rep, env: env.clone() });
                Focus::Eval(base, env)
            }
            Frame::IterRep { n, rep, env } => {
                self.stack.push(Frame::IterApply { n, base: circ(v)? });
                Focus::Eval(rep, env)
            }
            Frame::IterApply { n, base } => {
                let rep = circ(v)?;
                Focus::Return(Value::Circuit(iterate(n, &base, &rep)?))
            }
            Frame::Reverse => {
                let c = circ(v)?;
                let adjoint = |g: &str| cx.gates.adjoint_of(g).map(str::to_string);
                Focus::Return(Value::Circuit(c.reversed(&adjoint)?))
            }
            Frame::MeasCircuit { circuit, index, env } => {
                self.stack.push(Frame::MeasIndex { state: num(v)?, index, env: env.clone() });
                Focus::Eval(circuit, env)
            }
            Frame::MeasIndex { state, index, env } => {
                self.stack.push(Frame::MeasRun { state, circuit: circ(v)? });
                Focus::Eval(index, env)
            }
            Frame::MeasRun { state, circuit } => {
                let k = small(num(v)?, "circuit arity")?;
                let wires = circuit.wires();
                if wires != k + 1 {
                    return Err(stuck(format!("circuit on {wires} wires measured at arity {k}")));
                }
                if wires > cx.config.max_wires || wires >= 64 {
                    return Err(SimError::WireBudget { wires, limit: cx.config.max_wires }.into());
                }
                let mask = (BigUint::one() << wires) - 1u32;
                let x = (state & mask).to_u64().expect("masked below 64 bits");
                let dist = circuit_eval(k, x, &circuit, cx.gates, cx.config.max_wires)?;
                return Ok(Some(dist));
            }
        };
        self.focus = Some(next);
        Ok(None)
    }
}

/// `n` copies of `rep` in parallel, followed by `base` on the bottom wires.
fn iterate(n: u64, base: &CircuitValue, rep: &CircuitValue) -> Result<CircuitValue, CircuitError> {
    if n == 0 {
        return Ok(base.clone());
    }
    let mut acc = rep.clone();
    for _ in 1..n {
        acc = CircuitValue::par(acc, rep.clone())?;
    }
    CircuitValue::par(acc, base.clone())
}

fn require_annotated(t: &Term) -> Result<(), EvalError> {
    if t.is_annotated() {
        Ok(())
    } else {
        Err(stuck("term has not been through the type checker"))
    }
}

/// Follows one derivation of a closed, type-checked term.
pub fn eval_sample<R: Rng + ?Sized>(
    t: &Term,
    gates: &GateRegistry,
    config: &EvalConfig,
    rng: &mut R,
) -> Result<EvalOutcome, EvalError> {
    require_annotated(t)?;
    let cx = Context { gates, config: *config };
    let mut m = Machine::new(t);
    loop {
        match m.run(&cx)? {
            Pause::Done(value) => {
                return Ok(EvalOutcome {
                    value,
                    probability: m.probability,
                })
            }
            Pause::Measure(dist) => {
                let (i, p) = sample_measure(&dist, rng);
                m.resume(i, p);
            }
        }
    }
}

/// Enumerates every derivation of a closed, type-checked term, up to the
/// configured depth and mass cut-offs.
pub fn eval_dist(t: &Term, gates: &GateRegistry, config: &EvalConfig) -> Result<Distribution, EvalError> {
    require_annotated(t)?;
    let cx = Context { gates, config: *config };
    let mut out = Distribution::default();
    let mut work = vec![Machine::new(t)];
    while let Some(mut m) = work.pop() {
        match m.run(&cx) {
            Ok(Pause::Done(v)) => *out.masses.entry(v).or_insert(0.0) += m.probability,
            Ok(Pause::Measure(dist)) => {
                if m.measurements >= config.max_branch_depth {
                    out.residual += m.probability;
                    continue;
                }
                let outcomes: Vec<(u64, f64)> = dist.iter().collect();
                for &(i, p) in outcomes.iter().rev() {
                    let mut child = m.clone();
                    child.resume(i, p);
                    if child.probability < config.mass_eps {
                        out.residual += child.probability;
                    } else {
                        work.push(child);
                    }
                }
            }
            Err(EvalError::Divergence { .. }) => out.residual += m.probability,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
