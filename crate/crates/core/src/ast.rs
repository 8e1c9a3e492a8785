//! Abstract syntax of qPCF terms and types.
//!
//! Terms are Church-style: every binder carries its type annotation. Types
//! embed terms through `Circ(E)`, so substitution and α-equivalence are
//! defined jointly over both.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;

/// A position in a source file, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// The two total index operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexOp {
    Add,
    Mul,
}

impl IndexOp {
    pub fn symbol(self) -> &'static str {
        match self {
            IndexOp::Add => "+",
            IndexOp::Mul => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String),
    Lam(String, Box<Type>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Num(BigUint),
    Succ,
    Pred,
    If(Box<Term>, Box<Term>, Box<Term>),
    /// The fixpoint constant `Y_σ`, annotated with σ.
    Fix(Box<Type>),
    Get,
    Set,
    Gate(String),
    Seq(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Iter(Box<Term>, Box<Term>, Box<Term>),
    Reverse(Box<Term>),
    Op(IndexOp, Box<Term>, Box<Term>),
    /// `size M`; the second slot holds the index `E` of `M : Circ(E)` once
    /// the term has been type checked.
    Size(Box<Term>, Option<Box<Term>>),
    /// `dmeas(M, N)`; the slot holds the index of the circuit argument.
    DMeas(Box<Term>, Box<Term>, Option<Box<Term>>),
    /// Source position wrapper produced by the parser. Transparent to every
    /// semantic operation; elaboration removes it.
    Located(Span, Box<Term>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Type {
    Nat,
    Idx,
    Circ(Box<Term>),
    Pi(String, Box<Type>, Box<Type>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn num(n: u64) -> Term {
        Term::Num(BigUint::from(n))
    }

    pub fn lam(name: impl Into<String>, ty: Type, body: Term) -> Term {
        Term::Lam(name.into(), Box::new(ty), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Left-nested application of `f` to every argument in order.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn gate(name: impl Into<String>) -> Term {
        Term::Gate(name.into())
    }

    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Op(IndexOp::Add, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Op(IndexOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn if_(c: Term, l: Term, r: Term) -> Term {
        Term::If(Box::new(c), Box::new(l), Box::new(r))
    }

    pub fn iter(n: Term, base: Term, rep: Term) -> Term {
        Term::Iter(Box::new(n), Box::new(base), Box::new(rep))
    }

    pub fn reverse(c: Term) -> Term {
        Term::Reverse(Box::new(c))
    }

    pub fn size(c: Term) -> Term {
        Term::Size(Box::new(c), None)
    }

    pub fn dmeas(state: Term, circuit: Term) -> Term {
        Term::DMeas(Box::new(state), Box::new(circuit), None)
    }

    pub fn fix(ty: Type) -> Term {
        Term::Fix(Box::new(ty))
    }

    /// Strips any number of `Located` wrappers.
    pub fn unlocated(&self) -> &Term {
        let mut t = self;
        while let Term::Located(_, inner) = t {
            t = inner;
        }
        t
    }

    /// Removes every `Located` wrapper in the tree, including inside types.
    pub fn strip_locations(&self) -> Term {
        map_children(self.unlocated(), &mut |t| t.strip_locations(), &mut |ty| {
            ty.strip_locations()
        })
    }

    pub fn as_numeral(&self) -> Option<&BigUint> {
        match self.unlocated() {
            Term::Num(n) => Some(n),
            _ => None,
        }
    }

    /// True when every `size` and `dmeas` node carries its resolved index.
    pub fn is_annotated(&self) -> bool {
        let mut ok = true;
        visit(self, &mut |t| match t {
            Term::Size(_, None) | Term::DMeas(_, _, None) => ok = false,
            _ => {}
        });
        ok
    }
}

impl Type {
    pub fn circ(index: Term) -> Type {
        Type::Circ(Box::new(index))
    }

    pub fn circ_n(n: u64) -> Type {
        Type::Circ(Box::new(Term::num(n)))
    }

    pub fn pi(name: impl Into<String>, dom: Type, cod: Type) -> Type {
        Type::Pi(name.into(), Box::new(dom), Box::new(cod))
    }

    /// `dom -> cod`, choosing a binder that does not occur free in `cod`.
    pub fn arrow(dom: Type, cod: Type) -> Type {
        let avoid = free_vars_type(&cod);
        let name = fresh_name_avoiding("_", &avoid);
        Type::pi(name, dom, cod)
    }

    pub fn strip_locations(&self) -> Type {
        match self {
            Type::Nat => Type::Nat,
            Type::Idx => Type::Idx,
            Type::Circ(e) => Type::circ(e.strip_locations()),
            Type::Pi(x, d, c) => Type::pi(x.clone(), d.strip_locations(), c.strip_locations()),
        }
    }

    /// The result type after stripping every leading `Pi`.
    pub fn result(&self) -> &Type {
        let mut t = self;
        while let Type::Pi(_, _, c) = t {
            t = c;
        }
        t
    }
}

/// Rebuilds a node from its transformed children.
fn map_children(
    t: &Term,
    ft: &mut dyn FnMut(&Term) -> Term,
    fty: &mut dyn FnMut(&Type) -> Type,
) -> Term {
    let b = |t: Term| Box::new(t);
    match t {
        Term::Var(_)
        | Term::Num(_)
        | Term::Succ
        | Term::Pred
        | Term::Get
        | Term::Set
        | Term::Gate(_) => t.clone(),
        Term::Lam(x, ty, body) => Term::Lam(x.clone(), Box::new(fty(ty)), b(ft(body))),
        Term::App(f, a) => Term::App(b(ft(f)), b(ft(a))),
        Term::If(c, l, r) => Term::If(b(ft(c)), b(ft(l)), b(ft(r))),
        Term::Fix(ty) => Term::Fix(Box::new(fty(ty))),
        Term::Seq(x, y) => Term::Seq(b(ft(x)), b(ft(y))),
        Term::Par(x, y) => Term::Par(b(ft(x)), b(ft(y))),
        Term::Iter(n, x, y) => Term::Iter(b(ft(n)), b(ft(x)), b(ft(y))),
        Term::Reverse(x) => Term::Reverse(b(ft(x))),
        Term::Op(op, x, y) => Term::Op(*op, b(ft(x)), b(ft(y))),
        Term::Size(x, slot) => Term::Size(b(ft(x)), slot.as_ref().map(|e| b(ft(e)))),
        Term::DMeas(x, y, slot) => {
            Term::DMeas(b(ft(x)), b(ft(y)), slot.as_ref().map(|e| b(ft(e))))
        }
        Term::Located(sp, x) => Term::Located(*sp, b(ft(x))),
    }
}

/// Pre-order traversal over every term node, descending into types.
pub fn visit(t: &Term, f: &mut dyn FnMut(&Term)) {
    f(t);
    match t {
        Term::Var(_)
        | Term::Num(_)
        | Term::Succ
        | Term::Pred
        | Term::Get
        | Term::Set
        | Term::Gate(_) => {}
        Term::Lam(_, ty, body) => {
            visit_type(ty, f);
            visit(body, f);
        }
        Term::Fix(ty) => visit_type(ty, f),
        Term::App(x, y) | Term::Seq(x, y) | Term::Par(x, y) | Term::Op(_, x, y) => {
            visit(x, f);
            visit(y, f);
        }
        Term::If(x, y, z) | Term::Iter(x, y, z) => {
            visit(x, f);
            visit(y, f);
            visit(z, f);
        }
        Term::Reverse(x) | Term::Located(_, x) => visit(x, f),
        Term::Size(x, slot) => {
            visit(x, f);
            if let Some(e) = slot {
                visit(e, f);
            }
        }
        Term::DMeas(x, y, slot) => {
            visit(x, f);
            visit(y, f);
            if let Some(e) = slot {
                visit(e, f);
            }
        }
    }
}

fn visit_type(ty: &Type, f: &mut dyn FnMut(&Term)) {
    match ty {
        Type::Nat | Type::Idx => {}
        Type::Circ(e) => visit(e, f),
        Type::Pi(_, d, c) => {
            visit_type(d, f);
            visit_type(c, f);
        }
    }
}

// ---------------------------------------------------------------------------
// Fresh names

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Strips a trailing `_<digits>` suffix added by a previous renaming.
fn name_stem(name: &str) -> &str {
    if let Some(pos) = name.rfind('_') {
        let tail = &name[pos + 1..];
        if pos > 0 && !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
            return &name[..pos];
        }
    }
    name
}

/// A name derived from `base` with a globally unique numeric suffix, not in `avoid`.
pub fn fresh_name_avoiding(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = name_stem(base);
    loop {
        let n = FRESH_COUNTER.fetch_add(1, Ordering::Relaxed);
        let candidate = format!("{stem}_{n}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
}

// ---------------------------------------------------------------------------
// Free variables

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_term(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_type(ty: &Type) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_type(ty, &mut Vec::new(), &mut out);
    out
}

pub fn occurs_free(name: &str, t: &Term) -> bool {
    free_vars(t).contains(name)
}

fn fv_term(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, ty, body) => {
            fv_type(ty, bound, out);
            bound.push(x.clone());
            fv_term(body, bound, out);
            bound.pop();
        }
        Term::Fix(ty) => fv_type(ty, bound, out),
        Term::Num(_) | Term::Succ | Term::Pred | Term::Get | Term::Set | Term::Gate(_) => {}
        Term::App(x, y) | Term::Seq(x, y) | Term::Par(x, y) | Term::Op(_, x, y) => {
            fv_term(x, bound, out);
            fv_term(y, bound, out);
        }
        Term::If(x, y, z) | Term::Iter(x, y, z) => {
            fv_term(x, bound, out);
            fv_term(y, bound, out);
            fv_term(z, bound, out);
        }
        Term::Reverse(x) | Term::Located(_, x) => fv_term(x, bound, out),
        Term::Size(x, slot) => {
            fv_term(x, bound, out);
            if let Some(e) = slot {
                fv_term(e, bound, out);
            }
        }
        Term::DMeas(x, y, slot) => {
            fv_term(x, bound, out);
            fv_term(y, bound, out);
            if let Some(e) = slot {
                fv_term(e, bound, out);
            }
        }
    }
}

fn fv_type(ty: &Type, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match ty {
        Type::Nat | Type::Idx => {}
        Type::Circ(e) => fv_term(e, bound, out),
        Type::Pi(x, d, c) => {
            fv_type(d, bound, out);
            bound.push(x.clone());
            fv_type(c, bound, out);
            bound.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution

struct Subst<'a> {
    var: &'a str,
    arg: &'a Term,
    arg_fv: BTreeSet<String>,
}

impl Subst<'_> {
    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) if x == self.var => self.arg.clone(),
            Term::Lam(x, ty, body) => {
                let ty = self.ty(ty);
                if x == self.var {
                    return Term::Lam(x.clone(), Box::new(ty), body.clone());
                }
                let (x, body) = self.under_binder(x, body.as_ref(), occurs_free, rename_term);
                Term::Lam(x, Box::new(ty), Box::new(self.term(&body)))
            }
            _ => map_children(t, &mut |c| self.term(c), &mut |ty| self.ty(ty)),
        }
    }

    fn ty(&self, ty: &Type) -> Type {
        match ty {
            Type::Nat => Type::Nat,
            Type::Idx => Type::Idx,
            Type::Circ(e) => Type::circ(self.term(e)),
            Type::Pi(x, d, c) => {
                let d = self.ty(d);
                if x == self.var {
                    return Type::Pi(x.clone(), Box::new(d), c.clone());
                }
                let (x, c) = self.under_binder(x, c.as_ref(), occurs_free_type, rename_type);
                Type::pi(x, d, self.ty(&c))
            }
        }
    }

    /// Renames the binder `x` of `body` when substituting under it would capture.
    fn under_binder<B: Clone>(
        &self,
        x: &str,
        body: &B,
        free_in: fn(&str, &B) -> bool,
        rename: fn(&B, &str, &str) -> B,
    ) -> (String, B) {
        if self.arg_fv.contains(x) && free_in(self.var, body) {
            let mut avoid = self.arg_fv.clone();
            avoid.insert(self.var.to_string());
            let fresh = fresh_name_avoiding(x, &avoid);
            return (fresh.clone(), rename(body, x, &fresh));
        }
        (x.to_string(), body.clone())
    }
}

fn occurs_free_type(name: &str, ty: &Type) -> bool {
    free_vars_type(ty).contains(name)
}

fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    subst_term(t, from, &Term::Var(to.to_string()))
}

fn rename_type(ty: &Type, from: &str, to: &str) -> Type {
    subst_type(ty, from, &Term::Var(to.to_string()))
}

/// Capture-avoiding substitution `body[arg/var]`, descending into binder
/// annotations, `Circ` indexes and resolved-index slots.
pub fn subst_term(body: &Term, var: &str, arg: &Term) -> Term {
    let s = Subst {
        var,
        arg,
        arg_fv: free_vars(arg),
    };
    s.term(body)
}

/// Capture-avoiding substitution into a type.
pub fn subst_type(ty: &Type, var: &str, arg: &Term) -> Type {
    let s = Subst {
        var,
        arg,
        arg_fv: free_vars(arg),
    };
    s.ty(ty)
}

// ---------------------------------------------------------------------------
// α-equivalence

/// Equality up to consistent renaming of bound variables. Location wrappers
/// and the checker-filled slots of `size`/`dmeas` are ignored.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    Alpha::default().term(a, b)
}

pub fn alpha_eq_type(a: &Type, b: &Type) -> bool {
    Alpha::default().ty(a, b)
}

#[derive(Default)]
struct Alpha {
    left: Vec<String>,
    right: Vec<String>,
}

impl Alpha {
    fn lookup(stack: &[String], x: &str) -> Option<usize> {
        stack.iter().rev().position(|y| y == x)
    }

    fn bind<R>(&mut self, x: &str, y: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        self.left.push(x.to_string());
        self.right.push(y.to_string());
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn term(&mut self, a: &Term, b: &Term) -> bool {
        use Term::*;
        match (a.unlocated(), b.unlocated()) {
            (Var(x), Var(y)) => {
                match (Self::lookup(&self.left, x), Self::lookup(&self.right, y)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Lam(x, tx, bx), Lam(y, ty, by)) => {
                self.ty(tx, ty) && self.bind(x, y, |s| s.term(bx, by))
            }
            (App(f, x), App(g, y)) | (Seq(f, x), Seq(g, y)) | (Par(f, x), Par(g, y)) => {
                self.term(f, g) && self.term(x, y)
            }
            (Num(m), Num(n)) => m == n,
            (Succ, Succ) | (Pred, Pred) | (Get, Get) | (Set, Set) => true,
            (If(a1, a2, a3), If(b1, b2, b3)) | (Iter(a1, a2, a3), Iter(b1, b2, b3)) => {
                self.term(a1, b1) && self.term(a2, b2) && self.term(a3, b3)
            }
            (Fix(s), Fix(t)) => self.ty(s, t),
            (Gate(u), Gate(v)) => u == v,
            (Reverse(x), Reverse(y)) => self.term(x, y),
            (Op(o, x1, x2), Op(p, y1, y2)) => o == p && self.term(x1, y1) && self.term(x2, y2),
            (Size(x, _), Size(y, _)) => self.term(x, y),
            (DMeas(x1, x2, _), DMeas(y1, y2, _)) => self.term(x1, y1) && self.term(x2, y2),
            _ => false,
        }
    }

    fn ty(&mut self, a: &Type, b: &Type) -> bool {
        match (a, b) {
            (Type::Nat, Type::Nat) | (Type::Idx, Type::Idx) => true,
            (Type::Circ(e), Type::Circ(f)) => self.term(e, f),
            (Type::Pi(x, dx, cx), Type::Pi(y, dy, cy)) => {
                self.ty(dx, dy) && self.bind(x, y, |s| s.ty(cx, cy))
            }
            _ => false,
        }
    }
}

/// A string that identifies a term up to α-equivalence: bound variables are
/// printed as de Bruijn indexes, free variables by name, slots omitted.
pub fn canonical_key(t: &Term) -> String {
    let mut out = String::new();
    key_term(t, &mut Vec::new(), &mut out);
    out
}

fn key_term(t: &Term, bound: &mut Vec<String>, out: &mut String) {
    use std::fmt::Write;
    match t.unlocated() {
        Term::Var(x) => match bound.iter().rev().position(|b| b == x) {
            Some(i) => {
                let _ = write!(out, "#{i}");
            }
            None => {
                let _ = write!(out, "${x}");
            }
        },
        Term::Lam(x, ty, body) => {
            out.push_str("(L ");
            key_type(ty, bound, out);
            out.push(' ');
            bound.push(x.clone());
            key_term(body, bound, out);
            bound.pop();
            out.push(')');
        }
        Term::App(f, a) => key_node("A", &[f, a], bound, out),
        Term::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Succ => out.push_str("succ"),
        Term::Pred => out.push_str("pred"),
        Term::Get => out.push_str("get"),
        Term::Set => out.push_str("set"),
        Term::Gate(g) => {
            let _ = write!(out, "@{g}");
        }
        Term::If(c, l, r) => key_node("if", &[c, l, r], bound, out),
        Term::Fix(ty) => {
            out.push_str("(Y ");
            key_type(ty, bound, out);
            out.push(')');
        }
        Term::Seq(a, b) => key_node(";", &[a, b], bound, out),
        Term::Par(a, b) => key_node("||", &[a, b], bound, out),
        Term::Iter(n, a, b) => key_node("iter", &[n, a, b], bound, out),
        Term::Reverse(a) => key_node("rev", &[a], bound, out),
        Term::Op(op, a, b) => key_node(op.symbol(), &[a, b], bound, out),
        Term::Size(a, _) => key_node("size", &[a], bound, out),
        Term::DMeas(a, b, _) => key_node("dmeas", &[a, b], bound, out),
        Term::Located(..) => unreachable!("unlocated"),
    }
}

fn key_node(tag: &str, kids: &[&Term], bound: &mut Vec<String>, out: &mut String) {
    out.push('(');
    out.push_str(tag);
    for k in kids {
        out.push(' ');
        key_term(k, bound, out);
    }
    out.push(')');
}

fn key_type(ty: &Type, bound: &mut Vec<String>, out: &mut String) {
    match ty {
        Type::Nat => out.push_str("Nat"),
        Type::Idx => out.push_str("Idx"),
        Type::Circ(e) => {
            out.push_str("(Circ ");
            key_term(e, bound, out);
            out.push(')');
        }
        Type::Pi(x, d, c) => {
            out.push_str("(Pi ");
            key_type(d, bound, out);
            out.push(' ');
            bound.push(x.clone());
            key_type(c, bound, out);
            bound.pop();
            out.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// Bases

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("variable `{0}` is already bound in the base")]
pub struct DuplicateBinding(pub String);

/// An ordered typing context with pairwise-distinct names.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Base {
    entries: Vec<(String, Type)>,
}

impl Base {
    pub fn new() -> Self {
        Base::default()
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, Type)>,
    ) -> Result<Self, DuplicateBinding> {
        let mut base = Base::new();
        for (x, ty) in entries {
            base = base.extend(x, ty)?;
        }
        Ok(base)
    }

    pub fn extend(&self, name: impl Into<String>, ty: Type) -> Result<Base, DuplicateBinding> {
        let name = name.into();
        if self.contains(&name) {
            return Err(DuplicateBinding(name));
        }
        let mut entries = self.entries.clone();
        entries.push((name, ty));
        Ok(Base { entries })
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.entries.iter().find(|(x, _)| x == name).map(|(_, t)| t)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(x, _)| x == name)
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn entries(&self) -> &[(String, Type)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The base prefix preceding `name`, i.e. the context its type lives in.
    pub fn prefix_before(&self, name: &str) -> Base {
        let end = self
            .entries
            .iter()
            .position(|(x, _)| x == name)
            .unwrap_or(self.entries.len());
        Base {
            entries: self.entries[..end].to_vec(),
        }
    }
}
