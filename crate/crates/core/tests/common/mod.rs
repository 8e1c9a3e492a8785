//! Random well-typed terms and circuits, plus the property suites that use
//! them. Each suite is a plain function so the acceptance target can time
//! the same code the property tests run.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpcf::ast::{Base, Term, Type};
use qpcf::circuit::CircuitValue;
use qpcf::qsim::GateRegistry;

pub mod suites;

/// What a generated subterm must have as its type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Want {
    Nat,
    Idx,
    /// `Circ(n)` for a concrete n.
    Circ(u64),
    /// `Circ(x)` for an `Idx` variable x in scope.
    CircVar(String),
    NatFun,
}

impl Want {
    pub fn to_type(&self) -> Type {
        match self {
            Want::Nat => Type::Nat,
            Want::Idx => Type::Idx,
            Want::Circ(n) => Type::circ_n(*n),
            Want::CircVar(x) => Type::circ(Term::var(x.clone())),
            Want::NatFun => Type::arrow(Type::Nat, Type::Nat),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub depth: u32,
    /// Largest circuit index; circuits have at most this plus one wires.
    pub max_index: u64,
    /// `None` allows measurements anywhere. `Some(k)` allows at most k, none
    /// of them in a position that may be evaluated more than once.
    pub meas_budget: Option<u32>,
    pub divergence: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            depth: 4,
            max_index: 3,
            meas_budget: None,
            divergence: true,
        }
    }
}

pub type Env = Vec<(String, Want)>;

pub fn base_of(env: &Env) -> Base {
    env.iter().fold(Base::new(), |b, (x, w)| {
        b.extend(x.clone(), w.to_type()).expect("generated names are distinct")
    })
}

const ONE_WIRE: &[&str] = &["I", "H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg"];
const TWO_WIRE: &[&str] = &["CNOT", "CZ", "SWAP"];

pub struct Gen {
    pub rng: ChaCha8Rng,
    cfg: GenConfig,
    names: usize,
    meas_used: u32,
}

impl Gen {
    pub fn new(seed: u64, cfg: GenConfig) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
            names: 0,
            meas_used: 0,
        }
    }

    pub fn fresh(&mut self, stem: &str) -> String {
        self.names += 1;
        format!("{stem}{}", self.names)
    }

    pub fn closed(&mut self, w: &Want) -> Term {
        let depth = self.cfg.depth;
        self.term(w, &Vec::new(), depth, false)
    }

    pub fn open(&mut self, w: &Want, env: &Env) -> Term {
        let depth = self.cfg.depth;
        self.term(w, env, depth, false)
    }

    /// A ground target type for a closed term.
    pub fn ground_want(&mut self) -> Want {
        match self.rng.gen_range(0..4) {
            0 => Want::Nat,
            1 => Want::Idx,
            _ => Want::Circ(self.rng.gen_range(0..=self.cfg.max_index)),
        }
    }

    /// A type for a binder.
    pub fn binder_want(&mut self) -> Want {
        match self.rng.gen_range(0..5) {
            0 => Want::Nat,
            1 => Want::Idx,
            2 => Want::NatFun,
            _ => Want::Circ(self.rng.gen_range(0..=self.cfg.max_index)),
        }
    }

    fn var_of(&mut self, env: &Env, ok: impl Fn(&Want) -> bool) -> Option<Term> {
        let vars: Vec<&String> = env.iter().filter(|(_, w)| ok(w)).map(|(x, _)| x).collect();
        vars.choose(&mut self.rng).map(|x| Term::var((*x).clone()))
    }

    fn can_measure(&self, dup: bool) -> bool {
        match self.cfg.meas_budget {
            None => true,
            Some(k) => !dup && self.meas_used < k,
        }
    }

    fn small(&mut self, hi: u64) -> Term {
        Term::num(self.rng.gen_range(0..=hi))
    }

    /// A closed index expression equal to `k` built from numerals.
    pub fn idx_const(&mut self, k: u64) -> Term {
        match self.rng.gen_range(0..4) {
            0 if k > 0 => {
                let a = self.rng.gen_range(0..=k);
                Term::add(Term::num(a), Term::num(k - a))
            }
            1 => Term::mul(Term::num(1), Term::num(k)),
            2 => {
                let z = self.fresh("z");
                Term::app(
                    Term::lam(z.clone(), Type::Idx, Term::add(Term::var(z), Term::num(0))),
                    Term::num(k),
                )
            }
            _ => Term::num(k),
        }
    }

    pub fn gate(&mut self, n: u64) -> Term {
        match n {
            0 => Term::gate(*ONE_WIRE.choose(&mut self.rng).unwrap()),
            1 => Term::gate(*TWO_WIRE.choose(&mut self.rng).unwrap()),
            2 if self.rng.gen_bool(0.5) => Term::gate("CCNOT"),
            _ => {
                let a = self.rng.gen_range(0..n);
                let top = self.gate(a);
                let bottom = self.gate(n - 1 - a);
                Term::par(top, bottom)
            }
        }
    }

    fn leaf(&mut self, w: &Want, env: &Env) -> Term {
        let use_var = self.rng.gen_bool(0.4);
        match w {
            Want::Nat => {
                if use_var {
                    if let Some(v) = self.var_of(env, |w| matches!(w, Want::Nat | Want::Idx)) {
                        return v;
                    }
                }
                self.small(5)
            }
            Want::Idx => {
                if use_var {
                    if let Some(v) = self.var_of(env, |w| *w == Want::Idx) {
                        return v;
                    }
                }
                self.small(4)
            }
            Want::Circ(n) => {
                let n = *n;
                if use_var {
                    if let Some(v) = self.var_of(env, |w| *w == Want::Circ(n)) {
                        return v;
                    }
                }
                self.gate(n)
            }
            Want::CircVar(x) => {
                let target = Want::CircVar(x.clone());
                self.var_of(env, |w| *w == target)
                    .expect("a Circ(x) variable is bound with x")
            }
            Want::NatFun => {
                if use_var {
                    if let Some(v) = self.var_of(env, |w| *w == Want::NatFun) {
                        return v;
                    }
                }
                if self.rng.gen_bool(0.5) { Term::Succ } else { Term::Pred }
            }
        }
    }

    pub fn term(&mut self, w: &Want, env: &Env, depth: u32, dup: bool) -> Term {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(w, env);
        }
        let d = depth - 1;
        match w {
            Want::Nat => self.nat(env, d, dup),
            Want::Idx => self.idx(env, d, dup),
            Want::Circ(n) => self.circ(*n, env, d, dup),
            Want::CircVar(x) => self.circ_var(&x.clone(), env, d, dup),
            Want::NatFun => self.nat_fun(env, d),
        }
    }

    fn extended(env: &Env, x: &str, w: Want) -> Env {
        let mut e = env.clone();
        e.push((x.to_string(), w));
        e
    }

    /// `(fn x:T. body) arg` with a random T.
    fn redex(&mut self, w: &Want, env: &Env, d: u32, dup: bool) -> Term {
        let bw = self.binder_want();
        let x = self.fresh("x");
        let body = self.term(w, &Self::extended(env, &x, bw.clone()), d, dup);
        let arg = self.term(&bw, env, d, true);
        Term::app(Term::lam(x, bw.to_type(), body), arg)
    }

    /// `(fn x:Idx. fn u:Circ(x). body) E C` where E evaluates to the index of C.
    fn dependent(&mut self, w: &Want, env: &Env, d: u32, dup: bool) -> Term {
        let k = self.rng.gen_range(0..=self.cfg.max_index);
        let x = self.fresh("n");
        let u = self.fresh("u");
        let inner = Self::extended(&Self::extended(env, &x, Want::Idx), &u, Want::CircVar(x.clone()));
        let body = self.term(w, &inner, d, dup);
        let e = self.idx_const(k);
        let c = self.term(&Want::Circ(k), env, d, true);
        let f = Term::lam(
            x.clone(),
            Type::Idx,
            Term::lam(u, Type::circ(Term::var(x)), body),
        );
        Term::apps(f, [e, c])
    }

    fn nat(&mut self, env: &Env, d: u32, dup: bool) -> Term {
        let nat = Want::Nat;
        match self.rng.gen_range(0..13) {
            0 => {
                let f = if self.rng.gen_bool(0.5) { Term::Succ } else { Term::Pred };
                Term::app(f, self.term(&nat, env, d, dup))
            }
            1 | 2 => {
                let (a, b) = (self.any_num(env, d, dup), self.any_num(env, d, dup));
                if self.rng.gen_bool(0.5) { Term::add(a, b) } else { Term::mul(a, b) }
            }
            3 => {
                let c = self.term(&nat, env, d, dup);
                let l = self.term(&nat, env, d, dup);
                let r = self.term(&nat, env, d, dup);
                Term::if_(c, l, r)
            }
            4 => {
                let op = if self.rng.gen_bool(0.5) { Term::Get } else { Term::Set };
                let m = self.term(&nat, env, d, dup);
                let bit = self.small(9);
                Term::apps(op, [m, bit])
            }
            5 => {
                let k = self.rng.gen_range(0..=self.cfg.max_index);
                Term::size(self.term(&Want::Circ(k), env, d, dup))
            }
            6 if self.can_measure(dup) => {
                self.meas_used += 1;
                let k = self.rng.gen_range(0..=self.cfg.max_index);
                let state = self.term(&nat, env, d, dup);
                let c = self.term(&Want::Circ(k), env, d, dup);
                Term::dmeas(state, c)
            }
            7 => self.redex(&nat, env, d, dup),
            8 => {
                let f = self.term(&Want::NatFun, env, d, true);
                Term::app(f, self.term(&nat, env, d, true))
            }
            9 => {
                // Counts its argument down to zero.
                let sigma = Type::arrow(Type::Nat, Type::Nat);
                let (f, m) = (self.fresh("f"), self.fresh("m"));
                let body = self.term(&nat, &Self::extended(env, &m, Want::Nat), d.min(2), true);
                let step = Term::lam(
                    f.clone(),
                    sigma.clone(),
                    Term::lam(
                        m.clone(),
                        Type::Nat,
                        Term::if_(
                            Term::var(m.clone()),
                            body,
                            Term::app(Term::var(f), Term::app(Term::Pred, Term::var(m))),
                        ),
                    ),
                );
                let count = self.term(&nat, env, d.min(1), true);
                Term::apps(Term::fix(sigma), [step, count])
            }
            10 if self.cfg.divergence && self.rng.gen_bool(0.3) => {
                let x = self.fresh("x");
                Term::app(Term::fix(Type::Nat), Term::lam(x.clone(), Type::Nat, Term::var(x)))
            }
            11 => self.dependent(&nat, env, d, dup),
            _ => self.leaf(&nat, env),
        }
    }

    fn any_num(&mut self, env: &Env, d: u32, dup: bool) -> Term {
        let w = if self.rng.gen_bool(0.5) { Want::Nat } else { Want::Idx };
        self.term(&w, env, d, dup)
    }

    fn idx(&mut self, env: &Env, d: u32, dup: bool) -> Term {
        let idx = Want::Idx;
        match self.rng.gen_range(0..6) {
            0 | 1 => {
                let (a, b) = (self.term(&idx, env, d, dup), self.term(&idx, env, d, dup));
                if self.rng.gen_bool(0.5) { Term::add(a, b) } else { Term::mul(a, b) }
            }
            2 => {
                let k = self.rng.gen_range(0..=self.cfg.max_index);
                Term::size(self.term(&Want::Circ(k), env, d, dup))
            }
            3 => self.redex(&idx, env, d, dup),
            4 => self.dependent(&idx, env, d, dup),
            _ => self.leaf(&idx, env),
        }
    }

    fn circ(&mut self, n: u64, env: &Env, d: u32, dup: bool) -> Term {
        let w = Want::Circ(n);
        match self.rng.gen_range(0..11) {
            0 | 1 => Term::seq(self.term(&w, env, d, dup), self.term(&w, env, d, dup)),
            2 | 3 if n > 0 => {
                let a = self.rng.gen_range(0..n);
                let top = self.term(&Want::Circ(a), env, d, dup);
                let bottom = self.term(&Want::Circ(n - 1 - a), env, d, dup);
                Term::par(top, bottom)
            }
            4 => Term::reverse(self.term(&w, env, d, dup)),
            5 => {
                let c = self.term(&Want::Nat, env, d, dup);
                Term::if_(c, self.term(&w, env, d, dup), self.term(&w, env, d, dup))
            }
            6 => {
                // iter k C0 C1 : Circ(e0 + (1 + e1) * k)
                let k = self.rng.gen_range(0..=n.min(2));
                let e1 = if k == 0 {
                    self.rng.gen_range(0..=self.cfg.max_index)
                } else {
                    self.rng.gen_range(0..n / k)
                };
                let e0 = n - (1 + e1) * k;
                let count = self.idx_const(k);
                let c0 = self.term(&Want::Circ(e0), env, d, dup);
                let c1 = self.term(&Want::Circ(e1), env, d, dup);
                Term::iter(count, c0, c1)
            }
            7 => self.redex(&w, env, d, dup),
            8 => {
                let k = n;
                let x = self.fresh("n");
                let u = self.fresh("u");
                let inner = Self::extended(&Self::extended(env, &x, Want::Idx), &u, Want::CircVar(x.clone()));
                let body = self.term(&Want::CircVar(x.clone()), &inner, d, dup);
                let f = Term::lam(x.clone(), Type::Idx, Term::lam(u, Type::circ(Term::var(x)), body));
                let e = self.idx_const(k);
                let c = self.term(&w, env, d, true);
                Term::apps(f, [e, c])
            }
            9 => {
                // count+1 copies in sequence.
                let sigma = Type::arrow(Type::Nat, w.to_type());
                let (f, y) = (self.fresh("w"), self.fresh("y"));
                let inner = Self::extended(env, &y, Want::Nat);
                let c = self.term(&w, &inner, d.min(2), true);
                let c2 = self.term(&w, &inner, d.min(2), true);
                let step = Term::lam(
                    f.clone(),
                    sigma.clone(),
                    Term::lam(
                        y.clone(),
                        Type::Nat,
                        Term::if_(
                            Term::var(y.clone()),
                            c,
                            Term::seq(c2, Term::app(Term::var(f), Term::app(Term::Pred, Term::var(y)))),
                        ),
                    ),
                );
                let count = self.small(3);
                Term::apps(Term::fix(sigma), [step, count])
            }
            10 if self.cfg.divergence && self.rng.gen_bool(0.3) => {
                let c = self.fresh("c");
                Term::app(Term::fix(w.to_type()), Term::lam(c.clone(), w.to_type(), Term::var(c)))
            }
            _ => self.leaf(&w, env),
        }
    }

    fn circ_var(&mut self, x: &str, env: &Env, d: u32, dup: bool) -> Term {
        let w = Want::CircVar(x.to_string());
        match self.rng.gen_range(0..7) {
            0 | 1 => Term::seq(self.term(&w, env, d, dup), self.term(&w, env, d, dup)),
            2 => Term::reverse(self.term(&w, env, d, dup)),
            3 => {
                let c = self.term(&Want::Nat, env, d, dup);
                Term::if_(c, self.term(&w, env, d, dup), self.term(&w, env, d, dup))
            }
            4 => {
                // iter 0 C0 C1 : Circ(x + (1 + e1) * 0)
                let e1 = self.rng.gen_range(0..=self.cfg.max_index);
                let count = self.idx_const(0);
                let c0 = self.term(&w, env, d, dup);
                let c1 = self.term(&Want::Circ(e1), env, d, dup);
                Term::iter(count, c0, c1)
            }
            5 => self.redex(&w, env, d, dup),
            _ => self.leaf(&w, env),
        }
    }

    fn nat_fun(&mut self, env: &Env, d: u32) -> Term {
        match self.rng.gen_range(0..3) {
            0 => {
                let y = self.fresh("y");
                let body = self.term(&Want::Nat, &Self::extended(env, &y, Want::Nat), d, true);
                Term::lam(y, Type::Nat, body)
            }
            1 => Term::app(Term::Get, self.term(&Want::Nat, env, d, true)),
            _ => self.leaf(&Want::NatFun, env),
        }
    }
}

/// Gates with registry adjoints, by wire count.
fn gates_on(wires: u64) -> &'static [&'static str] {
    match wires {
        1 => &["I", "H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg"],
        2 => &["CNOT", "CZ", "SWAP"],
        3 => &["CCNOT"],
        _ => &[],
    }
}

/// A random circuit value on exactly `wires` wires.
pub fn random_circuit(rng: &mut ChaCha8Rng, wires: u64, depth: u32) -> CircuitValue {
    let gates = gates_on(wires);
    if depth == 0 || rng.gen_bool(0.25) {
        if !gates.is_empty() && (wires == 1 || rng.gen_bool(0.6)) {
            return CircuitValue::gate(*gates.choose(rng).unwrap(), wires);
        }
    }
    if wires > 1 && (depth == 0 || rng.gen_bool(0.5)) {
        let a = rng.gen_range(1..wires);
        let d = depth.saturating_sub(1);
        CircuitValue::par(random_circuit(rng, a, d), random_circuit(rng, wires - a, d)).unwrap()
    } else {
        let d = depth.saturating_sub(1);
        CircuitValue::seq(random_circuit(rng, wires, d), random_circuit(rng, wires, d)).unwrap()
    }
}

/// Runs `cases` seeds through `f` with a fixed runner seed.
pub fn run_seeds(
    name: &str,
    cases: u32,
    f: impl Fn(u64) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        max_shrink_iters: 0,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner
        .run(&any::<u64>(), |seed| f(seed))
        .map_err(|e| format!("{name}: {e}"))
}

pub fn registry() -> GateRegistry {
    GateRegistry::builtin()
}

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// Names bound anywhere in a term.
pub fn binders(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    qpcf::ast::visit(t, &mut |s| {
        if let Term::Lam(x, _, _) = s {
            out.insert(x.clone());
        }
    });
    out
}
