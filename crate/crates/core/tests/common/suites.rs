//! Property suites shared by the property tests and the acceptance target.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpcf::ast::{fresh_name_avoiding, subst_term, subst_type, Base, Term, Type};
use qpcf::circuit::{CircuitKind, CircuitValue};
use qpcf::eval::{eval_dist, eval_sample, EvalConfig, EvalError, Value};
use qpcf::index::eval_index;
use qpcf::qsim::{circuit_eval, hilb, GateRegistry, Matrix, DEFAULT_MAX_WIRES};
use qpcf::typecheck::{display_type, Checker, Typed};

use super::{base_of, random_circuit, run_seeds, Env, Gen, GenConfig, Want};

pub const FUEL: u64 = 200_000;

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn config() -> EvalConfig {
    EvalConfig {
        fuel: FUEL,
        ..EvalConfig::default()
    }
}

fn infer(reg: &GateRegistry, b: &Base, t: &Term) -> Result<Typed, TestCaseError> {
    Checker::new(reg)
        .infer(b, t)
        .map_err(|e| fail(format!("generated term rejected: {e}\n  term: {t}")))
}

fn type_eq(reg: &GateRegistry, a: &Type, b: &Type) -> Result<bool, TestCaseError> {
    Checker::new(reg)
        .type_eq(a, b)
        .map_err(|e| fail(format!("type comparison failed: {e}")))
}

/// The term must have the requested type, possibly through the Idx-to-Nat coercion.
fn has_want(reg: &GateRegistry, b: &Base, t: &Term, w: &Want) -> Result<Typed, TestCaseError> {
    let typed = infer(reg, b, t)?;
    if type_eq(reg, &typed.ty, &w.to_type())? {
        return Ok(typed);
    }
    match Checker::new(reg).check(b, t, &w.to_type()) {
        Ok(term) => Ok(Typed { term, ty: typed.ty }),
        Err(e) => Err(fail(format!("{t} : {}, wanted {}: {e}", display_type(&typed.ty), display_type(&w.to_type())))),
    }
}

fn random_env(g: &mut Gen) -> Env {
    let mut env = Env::new();
    for _ in 0..g.rng.gen_range(0..3) {
        let w = g.binder_want();
        env.push((g.fresh("v"), w));
    }
    if g.rng.gen_bool(0.5) {
        let n = g.fresh("k");
        env.push((n.clone(), Want::Idx));
        env.push((g.fresh("c"), Want::CircVar(n)));
    }
    env
}

/// Closed terms evaluate to a value of their type or run out of fuel; they
/// never get stuck.
pub fn preservation_progress(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("preservation/progress", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let w = g.ground_want();
        let t = g.closed(&w);
        let typed = has_want(&reg, &Base::new(), &t, &w)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match eval_sample(&typed.term, &reg, &config(), &mut rng) {
            Ok(out) => {
                prop_assert!(out.probability > 0.0 && out.probability <= 1.0 + 1e-12);
                match (&typed.ty, &out.value) {
                    (Type::Nat | Type::Idx, Value::Num(_)) => {}
                    (Type::Circ(e), Value::Circuit(c)) => {
                        let k = eval_index(e).map_err(|err| fail(format!("{e}: {err}")))?;
                        prop_assert_eq!(k + 1u32, c.wires().into(), "{} : {}", t, display_type(&typed.ty));
                    }
                    (ty, v) => return Err(fail(format!("{t} : {} evaluated to {v}", display_type(ty)))),
                }
            }
            Err(EvalError::Divergence { .. }) => {}
            Err(e) => return Err(fail(format!("{t}: {e}"))),
        }
        Ok(())
    })
}

/// Closed Idx terms normalize without fuel and evaluate with probability 1.
pub fn idx_totality(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("Idx totality", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let t = g.closed(&Want::Idx);
        let typed = has_want(&reg, &Base::new(), &t, &Want::Idx)?;
        let n = eval_index(&typed.term).map_err(|e| fail(format!("{t}: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = eval_sample(&typed.term, &reg, &config(), &mut rng)
            .map_err(|e| fail(format!("{t}: {e}")))?;
        prop_assert_eq!(out.value, Value::Num(n));
        prop_assert_eq!(out.probability, 1.0);
        Ok(())
    })
}

pub fn weakening(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("weakening", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let env = random_env(&mut g);
        let w = g.ground_want();
        let t = g.open(&w, &env);
        let b = base_of(&env);
        let ty = has_want(&reg, &b, &t, &w)?.ty;
        let extra = g.binder_want();
        let wider = b.extend(g.fresh("fresh"), extra.to_type()).unwrap();
        let ty2 = infer(&reg, &wider, &t)?.ty;
        prop_assert!(type_eq(&reg, &ty, &ty2)?, "{t}: {} vs {}", display_type(&ty), display_type(&ty2));
        Ok(())
    })
}

/// Whatever infers Idx also checks at Nat.
pub fn idx_is_nat(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("Idx subsumed by Nat", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let env = random_env(&mut g);
        let t = g.open(&Want::Idx, &env);
        let b = base_of(&env);
        let ty = infer(&reg, &b, &t)?.ty;
        prop_assert_eq!(&ty, &Type::Idx);
        Checker::new(&reg)
            .check(&b, &t, &Type::Nat)
            .map_err(|e| fail(format!("{t} is Idx but not Nat: {e}")))?;
        Ok(())
    })
}

fn indexes_are_idx(reg: &GateRegistry, b: &Base, ty: &Type) -> Result<(), TestCaseError> {
    match ty {
        Type::Nat | Type::Idx => Ok(()),
        Type::Circ(e) => {
            let ety = infer(reg, b, e)?.ty;
            prop_assert_eq!(ety, Type::Idx, "index {} in {}", e, display_type(ty));
            Ok(())
        }
        Type::Pi(x, d, c) => {
            indexes_are_idx(reg, b, d)?;
            let (b2, c2) = bind(b, x, d, c);
            indexes_are_idx(reg, &b2, &c2)
        }
    }
}

/// Extends `b` with `x : d`, renaming `x` in `c` if it is already bound.
fn bind(b: &Base, x: &str, d: &Type, c: &Type) -> (Base, Type) {
    match b.extend(x, d.clone()) {
        Ok(b2) => (b2, c.clone()),
        Err(_) => {
            let y = fresh_name_avoiding(x, &b.names());
            (b.extend(y.clone(), d.clone()).unwrap(), subst_type(c, x, &Term::var(y)))
        }
    }
}

fn term_indexes_are_idx(reg: &GateRegistry, b: &Base, t: &Term) -> Result<(), TestCaseError> {
    let idx = |e: &Term| -> Result<(), TestCaseError> {
        let ety = infer(reg, b, e)?.ty;
        prop_assert_eq!(ety, Type::Idx, "slot {}", e);
        Ok(())
    };
    match t {
        Term::Lam(x, ty, body) => {
            indexes_are_idx(reg, b, ty)?;
            match b.extend(x.clone(), (**ty).clone()) {
                Ok(b2) => term_indexes_are_idx(reg, &b2, body),
                Err(_) => {
                    let y = fresh_name_avoiding(x, &b.names());
                    let b2 = b.extend(y.clone(), (**ty).clone()).unwrap();
                    term_indexes_are_idx(reg, &b2, &subst_term(body, x, &Term::var(y)))
                }
            }
        }
        Term::Fix(ty) => indexes_are_idx(reg, b, ty),
        Term::Size(m, slot) => {
            if let Some(e) = slot {
                idx(e)?;
            }
            term_indexes_are_idx(reg, b, m)
        }
        Term::DMeas(s, c, slot) => {
            if let Some(e) = slot {
                idx(e)?;
            }
            term_indexes_are_idx(reg, b, s)?;
            term_indexes_are_idx(reg, b, c)
        }
        Term::App(x, y) | Term::Seq(x, y) | Term::Par(x, y) | Term::Op(_, x, y) => {
            term_indexes_are_idx(reg, b, x)?;
            term_indexes_are_idx(reg, b, y)
        }
        Term::If(x, y, z) | Term::Iter(x, y, z) => {
            term_indexes_are_idx(reg, b, x)?;
            term_indexes_are_idx(reg, b, y)?;
            term_indexes_are_idx(reg, b, z)
        }
        Term::Reverse(x) | Term::Located(_, x) => term_indexes_are_idx(reg, b, x),
        _ => Ok(()),
    }
}

/// Every circuit index in a derivation is itself an Idx term.
pub fn circuit_indexes(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("circuit indexes are Idx", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let env = random_env(&mut g);
        let w = g.ground_want();
        let t = g.open(&w, &env);
        let b = base_of(&env);
        let typed = has_want(&reg, &b, &t, &w)?;
        indexes_are_idx(&reg, &b, &typed.ty)?;
        term_indexes_are_idx(&reg, &b, &typed.term)
    })
}

pub fn substitution(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("substitution", cases, |seed| {
        let mut g = Gen::new(seed, GenConfig::default());
        let sigma = g.binder_want();
        let x = g.fresh("s");
        let env: Env = vec![(x.clone(), sigma.clone())];
        let m = if sigma == Want::Idx && g.rng.gen_bool(0.5) {
            // A type that mentions x.
            let u = g.fresh("u");
            let inner = vec![(x.clone(), Want::Idx), (u.clone(), Want::CircVar(x.clone()))];
            let body = g.open(&Want::CircVar(x.clone()), &inner);
            Term::lam(u, Type::circ(Term::var(x.clone())), body)
        } else {
            let w = g.ground_want();
            g.open(&w, &env)
        };
        let tau = infer(&reg, &base_of(&env), &m)?.ty;
        let mut g2 = Gen::new(seed ^ 0x9e37_79b9, GenConfig::default());
        let n = g2.closed(&sigma);
        has_want(&reg, &Base::new(), &n, &sigma)?;
        let substituted = subst_term(&m, &x, &n);
        let got = infer(&reg, &Base::new(), &substituted)?.ty;
        let expected = subst_type(&tau, &x, &n);
        // Replacing a Nat variable by an Idx term may sharpen Nat to Idx.
        prop_assert!(
            Checker::new(&reg).check(&Base::new(), &substituted, &expected).is_ok(),
            "{m} [{n}/{x}] : {} expected {}",
            display_type(&got),
            display_type(&expected)
        );
        Ok(())
    })
}

fn finite_config() -> GenConfig {
    GenConfig {
        depth: 4,
        max_index: 3,
        meas_budget: Some(3),
        divergence: true,
    }
}

/// Recorded mass plus residual is 1.
pub fn distribution_mass(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("distribution mass", cases, |seed| {
        let mut g = Gen::new(seed, finite_config());
        let w = g.ground_want();
        let t = g.closed(&w);
        let typed = has_want(&reg, &Base::new(), &t, &w)?;
        let d = eval_dist(&typed.term, &reg, &config()).map_err(|e| fail(format!("{t}: {e}")))?;
        prop_assert!((d.total() - 1.0).abs() <= 1e-9, "{t}: total {}", d.total());
        prop_assert!(d.masses.values().all(|&p| p > 0.0) && d.residual >= -1e-12);
        Ok(())
    })
}

/// Empirical frequencies over `samples` seeds lie within 3 sigma of the
/// exact distribution, for `terms` generated programs that measure.
pub fn sampling_agrees(terms: usize, samples: u64) -> Result<(), String> {
    let reg = super::registry();
    let cfg = GenConfig {
        depth: 4,
        max_index: 2,
        meas_budget: Some(2),
        divergence: false,
    };
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < terms {
        seed += 1;
        let mut g = Gen::new(seed, cfg);
        let t = g.closed(&Want::Nat);
        let Ok(typed) = Checker::new(&reg).infer(&Base::new(), &t) else {
            return Err(format!("generated term rejected: {t}"));
        };
        let d = eval_dist(&typed.term, &reg, &config()).map_err(|e| format!("{t}: {e}"))?;
        if d.masses.len() < 2 || d.residual > 0.0 {
            continue;
        }
        checked += 1;
        let mut counts = std::collections::BTreeMap::new();
        for s in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(s.wrapping_mul(0x2545_f491) ^ seed);
            let out = eval_sample(&typed.term, &reg, &config(), &mut rng).map_err(|e| format!("{t}: {e}"))?;
            *counts.entry(out.value).or_insert(0u64) += 1;
        }
        for (v, &p) in &d.masses {
            let freq = counts.get(v).copied().unwrap_or(0) as f64 / samples as f64;
            let sigma = (p * (1.0 - p) / samples as f64).sqrt();
            if (freq - p).abs() > 3.0 * sigma + 1e-12 {
                return Err(format!("{t}: value {v} has mass {p} but frequency {freq}"));
            }
        }
        if let Some(v) = counts.keys().find(|v| !d.masses.contains_key(*v)) {
            return Err(format!("{t}: sampled {v}, which has no mass"));
        }
    }
    Ok(())
}

fn eval_circuit(reg: &GateRegistry, t: &Term) -> Result<CircuitValue, TestCaseError> {
    let typed = infer(reg, &Base::new(), t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    match eval_sample(&typed.term, reg, &config(), &mut rng) {
        Ok(out) => match out.value {
            Value::Circuit(c) => Ok(c),
            v => Err(fail(format!("{t} evaluated to {v}"))),
        },
        Err(e) => Err(fail(format!("{t}: {e}"))),
    }
}

/// reverse (reverse C) denotes the same unitary as C.
pub fn reverse_involution(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    let cfg = GenConfig {
        depth: 4,
        max_index: 3,
        meas_budget: Some(0),
        divergence: false,
    };
    run_seeds("reverse involution", cases, |seed| {
        let mut g = Gen::new(seed, cfg);
        let n = g.rng.gen_range(0..=3);
        let t = g.closed(&Want::Circ(n));
        let c = eval_circuit(&reg, &t)?;
        let rr = eval_circuit(&reg, &Term::reverse(Term::reverse(t.clone())))?;
        let (a, b) = (hilb(&c, &reg, DEFAULT_MAX_WIRES).unwrap(), hilb(&rr, &reg, DEFAULT_MAX_WIRES).unwrap());
        prop_assert!(a.approx_eq(&b, 1e-12), "{t}");
        Ok(())
    })
}

fn identity_distance(u: &Matrix) -> f64 {
    u.adjoint().mul(u).max_distance(&Matrix::identity(u.dim()))
}

pub fn unitarity(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("unitarity", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wires = rng.gen_range(1..=6);
        let c = random_circuit(&mut rng, wires, 5);
        let u = hilb(&c, &reg, DEFAULT_MAX_WIRES).unwrap();
        prop_assert_eq!(u.dim(), 1usize << wires);
        prop_assert!(identity_distance(&u) <= 1e-10, "{c}");
        Ok(())
    })
}

/// Source text that evaluates to `c`: parallel operands are written
/// bottom-up because evaluation swaps them.
pub fn source_of(c: &CircuitValue) -> Term {
    match c.kind() {
        CircuitKind::Gate(g) => Term::gate(g.clone()),
        CircuitKind::Seq(a, b) => Term::seq(source_of(a), source_of(b)),
        CircuitKind::Par(a, b) => Term::par(source_of(b), source_of(a)),
    }
}

/// The evaluator's reverse denotes the conjugate transpose.
pub fn reverse_is_adjoint(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("reverse is the adjoint", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wires = rng.gen_range(1..=6);
        let c = random_circuit(&mut rng, wires, 5);
        prop_assert_eq!(&eval_circuit(&reg, &source_of(&c))?, &c);
        let r = eval_circuit(&reg, &Term::reverse(source_of(&c)))?;
        let u = hilb(&c, &reg, DEFAULT_MAX_WIRES).unwrap();
        let v = hilb(&r, &reg, DEFAULT_MAX_WIRES).unwrap();
        prop_assert!(v.approx_eq(&u.adjoint(), 1e-10), "{c} reversed to {r}");
        Ok(())
    })
}

pub fn tensor_dimension(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("tensor dimension", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (wa, wb) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = random_circuit(&mut rng, wa, 3);
        let b = random_circuit(&mut rng, wb, 3);
        let p = CircuitValue::par(a.clone(), b.clone()).unwrap();
        let (ha, hb) = (hilb(&a, &reg, 16).unwrap(), hilb(&b, &reg, 16).unwrap());
        let hp = hilb(&p, &reg, 16).unwrap();
        prop_assert_eq!(hp.dim(), ha.dim() * hb.dim());
        prop_assert!(hp.approx_eq(&ha.kron(&hb), 1e-12));
        Ok(())
    })
}

pub fn probability_conservation(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("probability conservation", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wires = rng.gen_range(1..=6);
        let c = random_circuit(&mut rng, wires, 5);
        let x = rng.gen_range(0..(1u64 << wires));
        let d = circuit_eval(wires - 1, x, &c, &reg, DEFAULT_MAX_WIRES).unwrap();
        prop_assert!((d.total() - 1.0).abs() <= 1e-9, "{c} from {x}: {}", d.total());
        prop_assert!(d.iter().all(|(o, p)| o < (1 << wires) && p > 0.0));
        Ok(())
    })
}

/// Repeating a call gives the same answer whatever ran in between.
pub fn statelessness(cases: u32) -> Result<(), String> {
    let reg = super::registry();
    run_seeds("statelessness", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wires = rng.gen_range(1..=5);
        let c = random_circuit(&mut rng, wires, 4);
        let other = random_circuit(&mut rng, wires, 4);
        let x = rng.gen_range(0..(1u64 << wires));
        let first: Vec<(u64, f64)> = circuit_eval(wires - 1, x, &c, &reg, 16).unwrap().iter().collect();
        circuit_eval(wires - 1, (x + 1) % (1 << wires), &other, &reg, 16).unwrap();
        let second: Vec<(u64, f64)> = circuit_eval(wires - 1, x, &c, &reg, 16).unwrap().iter().collect();
        prop_assert_eq!(first, second);
        Ok(())
    })
}

/// `mseq k C n` is n+1 right-nested copies of C.
pub fn mseq_copies(cases: u32) -> Result<(), String> {
    let session = qpcf::Session::new();
    run_seeds("mseq copies", cases, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(0..=2u64);
        let n = rng.gen_range(0..=6u64);
        let c = random_circuit(&mut rng, k + 1, 3);
        let src = format!("mseq {k} ({}) {n}", source_of(&c));
        let got = session.circuit(&src).map_err(|e| fail(format!("{src}: {e}")))?;
        let mut expected = c.clone();
        for _ in 0..n {
            expected = CircuitValue::seq(c.clone(), expected).unwrap();
        }
        prop_assert_eq!(got.to_string(), expected.to_string());
        prop_assert_eq!(got.depth(), expected.depth());
        Ok(())
    })
}

/// The sizes every suite runs at in the metatheory criterion.
pub const METATHEORY_CASES: u32 = 1000;
pub const REVERSE_CASES: u32 = 500;

/// Runs the metatheory suites and returns the failures.
pub fn metatheory() -> Vec<String> {
    let suites: [(&str, fn(u32) -> Result<(), String>, u32); 5] = [
        ("preservation/progress", preservation_progress, METATHEORY_CASES),
        ("Idx totality", idx_totality, METATHEORY_CASES),
        ("unitarity", unitarity, METATHEORY_CASES),
        ("probability conservation", probability_conservation, METATHEORY_CASES),
        ("reverse is the adjoint", reverse_is_adjoint, REVERSE_CASES),
    ];
    suites
        .iter()
        .filter_map(|(_, f, n)| f(*n).err())
        .collect()
}
