//! Index expressions: a decision procedure for the type congruence on
//! `Circ(E)` indexes and the total evaluator for closed indexes.
//!
//! Equality is decided by β-contracting within a step budget and then
//! comparing polynomial normal forms over commutative semiring laws for `+`
//! and `*`. Sub-terms that are not arithmetic (`size M`, stuck applications)
//! become opaque indeterminates compared up to α-equivalence.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::ast::{canonical_key, subst_term, IndexOp, Term};

pub const DEFAULT_INDEX_FUEL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndexError {
    #[error("β-reduction budget exhausted while normalizing an index")]
    FuelExhausted,
    #[error("`size` node without a resolved index reached during evaluation")]
    UnannotatedSize,
    #[error("not a closed index expression: {0}")]
    NotClosedIndex(String),
}

/// Step budget for β-contraction.
#[derive(Debug, Clone, Copy)]
pub struct Fuel(u64);

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Fuel(steps)
    }

    pub fn remaining(&self) -> u64 {
        self.0
    }

    fn spend(&mut self) -> Result<(), IndexError> {
        if self.0 == 0 {
            return Err(IndexError::FuelExhausted);
        }
        self.0 -= 1;
        Ok(())
    }
}

/// An indeterminate of the polynomial ring.
#[derive(Clone, Debug)]
pub enum Indeterminate {
    Var(String),
    /// An opaque sub-term, identified by its α-canonical key. `term` is kept
    /// for display only.
    Atom { key: String, term: Term },
}

impl Indeterminate {
    fn sort_key(&self) -> (u8, &str) {
        match self {
            Indeterminate::Var(x) => (0, x),
            Indeterminate::Atom { key, .. } => (1, key),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Indeterminate::Var(x) => Term::Var(x.clone()),
            Indeterminate::Atom { term, .. } => term.clone(),
        }
    }
}

impl PartialEq for Indeterminate {
    fn eq(&self, other: &Self) -> bool {
        self.sort_key() == other.sort_key()
    }
}

impl Eq for Indeterminate {}

impl PartialOrd for Indeterminate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Indeterminate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// A multiset of indeterminates, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(Vec<Indeterminate>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[Indeterminate] {
        &self.0
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        Monomial(v)
    }
}

/// Canonical polynomial: monomials mapped to non-zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IndexPoly {
    terms: BTreeMap<Monomial, BigUint>,
}

impl IndexPoly {
    pub fn zero() -> Self {
        IndexPoly::default()
    }

    pub fn constant(n: BigUint) -> Self {
        let mut p = IndexPoly::zero();
        if !n.is_zero() {
            p.terms.insert(Monomial::one(), n);
        }
        p
    }

    pub fn indeterminate(x: Indeterminate) -> Self {
        let mut p = IndexPoly::zero();
        p.terms.insert(Monomial(vec![x]), BigUint::one());
        p
    }

    pub fn var(name: &str) -> Self {
        IndexPoly::indeterminate(Indeterminate::Var(name.to_string()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigUint)> {
        self.terms.iter()
    }

    /// The value of a constant polynomial.
    pub fn as_constant(&self) -> Option<BigUint> {
        match self.terms.len() {
            0 => Some(BigUint::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &IndexPoly) -> IndexPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_insert_with(BigUint::zero) += c;
        }
        out
    }

    pub fn mul(&self, other: &IndexPoly) -> IndexPoly {
        let mut out = IndexPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *out.terms.entry(m1.times(m2)).or_insert_with(BigUint::zero) += c1 * c2;
            }
        }
        out
    }

    /// Evaluates the polynomial under an assignment of its indeterminates.
    pub fn evaluate(&self, assign: &mut dyn FnMut(&Indeterminate) -> BigUint) -> BigUint {
        let mut total = BigUint::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for x in &m.0 {
                prod *= assign(x);
            }
            total += prod;
        }
        total
    }

    pub fn indeterminates(&self) -> Vec<Indeterminate> {
        let mut v: Vec<Indeterminate> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Builds an index term for the polynomial: highest degree first, the
    /// constant last.
    pub fn to_term(&self) -> Term {
        let mut monos: Vec<(&Monomial, &BigUint)> = self.terms.iter().collect();
        monos.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| a.cmp(b)));
        let mono_term = |m: &Monomial, c: &BigUint| -> Term {
            let mut factors = m.0.iter().map(Indeterminate::to_term);
            let first = if c.is_one() {
                factors.next()
            } else {
                Some(Term::Num(c.clone()))
            };
            match first {
                None => Term::Num(c.clone()),
                Some(f) => factors.fold(f, Term::mul),
            }
        };
        monos
            .into_iter()
            .map(|(m, c)| mono_term(m, c))
            .reduce(Term::add)
            .unwrap_or_else(|| Term::num(0))
    }
}

impl fmt::Display for IndexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

// ---------------------------------------------------------------------------
// β-normalization

/// Contracts the head redexes of an application spine.
fn whnf(t: &Term, fuel: &mut Fuel) -> Result<Term, IndexError> {
    let mut cur = t.unlocated().clone();
    loop {
        let mut args = Vec::new();
        let mut head = &cur;
        while let Term::App(f, a) = head.unlocated() {
            args.push(a.as_ref());
            head = f;
        }
        let Term::Lam(x, _, body) = head.unlocated() else {
            return Ok(cur);
        };
        let Some(arg) = args.pop() else {
            return Ok(cur);
        };
        fuel.spend()?;
        let reduced = subst_term(body, x, arg);
        let rebuilt = args
            .into_iter()
            .rev()
            .fold(reduced, |acc, a| Term::app(acc, a.clone()));
        cur = rebuilt.unlocated().clone();
    }
}

/// Full normal-order β-normalization within the budget. Fixpoints are not
/// unfolded.
pub fn beta_normalize(t: &Term, fuel: &mut Fuel) -> Result<Term, IndexError> {
    let t = whnf(t, fuel)?;
    let b = |t: Term| Box::new(t);
    Ok(match &t {
        Term::Lam(x, ty, body) => Term::Lam(x.clone(), ty.clone(), b(beta_normalize(body, fuel)?)),
        Term::App(f, a) => Term::App(b(beta_normalize(f, fuel)?), b(beta_normalize(a, fuel)?)),
        Term::If(c, l, r) => Term::If(
            b(beta_normalize(c, fuel)?),
            b(beta_normalize(l, fuel)?),
            b(beta_normalize(r, fuel)?),
        ),
        Term::Seq(x, y) => Term::Seq(b(beta_normalize(x, fuel)?), b(beta_normalize(y, fuel)?)),
        Term::Par(x, y) => Term::Par(b(beta_normalize(x, fuel)?), b(beta_normalize(y, fuel)?)),
        Term::Iter(n, x, y) => Term::Iter(
            b(beta_normalize(n, fuel)?),
            b(beta_normalize(x, fuel)?),
            b(beta_normalize(y, fuel)?),
        ),
        Term::Reverse(x) => Term::Reverse(b(beta_normalize(x, fuel)?)),
        Term::Op(op, x, y) => Term::Op(*op, b(beta_normalize(x, fuel)?), b(beta_normalize(y, fuel)?)),
        Term::Size(x, slot) => Term::Size(b(beta_normalize(x, fuel)?), slot.clone()),
        Term::DMeas(x, y, slot) => Term::DMeas(
            b(beta_normalize(x, fuel)?),
            b(beta_normalize(y, fuel)?),
            slot.clone(),
        ),
        other => other.clone(),
    })
}

fn atom(t: Term) -> IndexPoly {
    IndexPoly::indeterminate(Indeterminate::Atom {
        key: canonical_key(&t),
        term: t,
    })
}

/// Polynomial normal form of an index term.
pub fn normalize_index(e: &Term, fuel: &mut Fuel) -> Result<IndexPoly, IndexError> {
    let t = whnf(e, fuel)?;
    Ok(match &t {
        Term::Num(n) => IndexPoly::constant(n.clone()),
        Term::Var(x) => IndexPoly::var(x),
        Term::Op(op, a, b) => {
            let (pa, pb) = (normalize_index(a, fuel)?, normalize_index(b, fuel)?);
            match op {
                IndexOp::Add => pa.add(&pb),
                IndexOp::Mul => pa.mul(&pb),
            }
        }
        Term::Size(m, _) => atom(Term::size(beta_normalize(m, fuel)?)),
        _ => atom(beta_normalize(&t, fuel)?),
    })
}

/// Decides `a ≃ b` for index terms. `Err` means the budget ran out before a
/// decision could be reached.
pub fn index_eq(a: &Term, b: &Term, fuel: &mut Fuel) -> Result<bool, IndexError> {
    Ok(normalize_index(a, fuel)? == normalize_index(b, fuel)?)
}

/// Evaluates a closed, annotated index term to its numeral.
pub fn eval_index(e: &Term) -> Result<BigUint, IndexError> {
    let mut cur = e.unlocated().clone();
    loop {
        match &cur {
            Term::Num(n) => return Ok(n.clone()),
            Term::Op(op, a, b) => {
                let (x, y) = (eval_index(a)?, eval_index(b)?);
                return Ok(match op {
                    IndexOp::Add => x + y,
                    IndexOp::Mul => x * y,
                });
            }
            Term::Size(_, Some(slot)) => cur = slot.unlocated().clone(),
            Term::Size(_, None) => return Err(IndexError::UnannotatedSize),
            Term::App(..) => {
                let mut args = Vec::new();
                let mut head = &cur;
                while let Term::App(f, a) = head.unlocated() {
                    args.push(a.as_ref().clone());
                    head = f;
                }
                let Term::Lam(x, _, body) = head.unlocated() else {
                    return Err(IndexError::NotClosedIndex(cur.to_string()));
                };
                let arg = args.pop().expect("application spine has an argument");
                let reduced = subst_term(body, x, &arg);
                cur = args
                    .into_iter()
                    .rev()
                    .fold(reduced, Term::app)
                    .unlocated()
                    .clone();
            }
            other => return Err(IndexError::NotClosedIndex(other.to_string())),
        }
    }
}
