//! Dependent type checking.
//!
//! The checker is syntax-directed: every term form has exactly one rule,
//! and the `Idx`-to-`Nat` coercion is applied wherever `Nat` is demanded and
//! `Idx` is found. Checking also elaborates the term: source positions are
//! dropped and every `size`/`dmeas` node receives its resolved index.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{
    free_vars, free_vars_type, fresh_name_avoiding, subst_term, subst_type, Base,
    Span, Term, Type,
};
use crate::index::{index_eq, normalize_index, Fuel, IndexError, DEFAULT_INDEX_FUEL};
use crate::qsim::GateRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeErrorKind {
    Mismatch,
    Unbound,
    IndexInequality,
    IndexIndecision,
    FixRestriction,
    ObligationFailure,
    UnknownGate,
}

impl TypeErrorKind {
    pub fn describe(self) -> &'static str {
        match self {
            TypeErrorKind::Mismatch => "type mismatch",
            TypeErrorKind::Unbound => "unbound variable",
            TypeErrorKind::IndexInequality => "index inequality",
            TypeErrorKind::IndexIndecision => "cannot decide index equality",
            TypeErrorKind::FixRestriction => "fixpoint result restriction",
            TypeErrorKind::ObligationFailure => "obligation failure",
            TypeErrorKind::UnknownGate => "unknown gate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// The typing rule that failed, e.g. `P2` or `C3`.
    pub rule: &'static str,
    pub span: Option<Span>,
    pub expected: Option<Type>,
    pub found: Option<Type>,
    pub message: String,
}

impl TypeError {
    fn new(kind: TypeErrorKind, rule: &'static str, span: Option<Span>, message: impl Into<String>) -> Self {
        TypeError {
            kind,
            rule,
            span,
            expected: None,
            found: None,
            message: message.into(),
        }
    }

    fn with_types(mut self, expected: Option<&Type>, found: Option<&Type>) -> Self {
        self.expected = expected.cloned();
        self.found = found.cloned();
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type error")?;
        if let Some(sp) = self.span {
            write!(f, " at {sp}")?;
        }
        write!(f, " (rule {}, {}): {}", self.rule, self.kind.describe(), self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "; expected {}", display_type(e))?;
        }
        if let Some(t) = &self.found {
            write!(f, "; found {}", display_type(t))?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeError {}

/// A typing judgement `base ⊢ subject : expected` that must hold for a type
/// to be well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub base: Base,
    pub subject: Term,
    pub expected: Type,
}

/// The obligations making `ty` well formed in `b`: every `Circ(E)` demands
/// `E : Idx` in the base where it occurs.
pub fn extract_obligations(b: &Base, ty: &Type) -> Vec<Obligation> {
    let mut out = Vec::new();
    collect_obligations(b, ty, &mut out);
    out
}

fn collect_obligations(b: &Base, ty: &Type, out: &mut Vec<Obligation>) {
    match ty {
        Type::Nat | Type::Idx => {}
        Type::Circ(e) => out.push(Obligation {
            base: b.clone(),
            subject: (**e).clone(),
            expected: Type::Idx,
        }),
        Type::Pi(x, dom, cod) => {
            collect_obligations(b, dom, out);
            let (x, cod) = binder_outside(b, x, cod, &BTreeSet::new());
            let inner = b.extend(x, (**dom).clone()).expect("binder is fresh");
            collect_obligations(&inner, &cod, out);
        }
    }
}

/// Renames the binder `x` of `cod` when it clashes with the base.
fn binder_outside(b: &Base, x: &str, cod: &Type, extra: &BTreeSet<String>) -> (String, Type) {
    if !b.contains(x) {
        return (x.to_string(), cod.clone());
    }
    let mut avoid = b.names();
    avoid.extend(free_vars_type(cod));
    avoid.extend(extra.iter().cloned());
    let fresh = fresh_name_avoiding(x, &avoid);
    let cod = subst_type(cod, x, &Term::Var(fresh.clone()));
    (fresh, cod)
}

/// An elaborated term with its type.
#[derive(Debug, Clone, PartialEq)]
pub struct Typed {
    pub term: Term,
    pub ty: Type,
}

pub struct Checker<'g> {
    gates: &'g GateRegistry,
    index_fuel: u64,
}

fn nat_to_nat() -> Type {
    Type::arrow(Type::Nat, Type::Nat)
}

impl<'g> Checker<'g> {
    pub fn new(gates: &'g GateRegistry) -> Self {
        Checker {
            gates,
            index_fuel: DEFAULT_INDEX_FUEL,
        }
    }

    /// β-step budget for each index comparison.
    pub fn with_index_fuel(mut self, fuel: u64) -> Self {
        self.index_fuel = fuel;
        self
    }

    /// Infers the type of `t` in `b`, after checking that every type in `b`
    /// is well formed.
    pub fn infer(&self, b: &Base, t: &Term) -> Result<Typed, TypeError> {
        let b = self.check_base(b)?;
        let (term, ty) = self.infer_at(&b, t, None)?;
        Ok(Typed { term, ty })
    }

    /// Checks `t` against `expected`, allowing the `Idx`-to-`Nat` coercion.
    pub fn check(&self, b: &Base, t: &Term, expected: &Type) -> Result<Term, TypeError> {
        let b = self.check_base(b)?;
        let expected = self.wf_type(&b, expected, None, "P0")?;
        self.check_at(&b, t, &expected, None, "P2")
    }

    /// Discharges one obligation, returning the elaborated subject.
    pub fn discharge(&self, ob: &Obligation) -> Result<Term, TypeError> {
        let (e, ty) = self.infer_at(&ob.base, &ob.subject, None)?;
        if self.type_eq(&ty, &ob.expected)? {
            Ok(e)
        } else {
            Err(TypeError::new(
                TypeErrorKind::ObligationFailure,
                "P0",
                None,
                format!("`{}` must have type {}", ob.subject, display_type(&ob.expected)),
            )
            .with_types(Some(&ob.expected), Some(&ty)))
        }
    }

    /// Checks the well-formedness of each base entry in the base preceding
    /// it, returning the base with elaborated types.
    pub fn check_base(&self, b: &Base) -> Result<Base, TypeError> {
        let mut out = Base::new();
        for (x, ty) in b.entries() {
            let ty = self.wf_type(&out, ty, None, "P0")?;
            out = out.extend(x.clone(), ty).map_err(|e| {
                TypeError::new(TypeErrorKind::Mismatch, "P0", None, e.to_string())
            })?;
        }
        Ok(out)
    }

    /// Type equality up to α-conversion and index congruence.
    pub fn type_eq(&self, a: &Type, b: &Type) -> Result<bool, TypeError> {
        match (a, b) {
            (Type::Nat, Type::Nat) | (Type::Idx, Type::Idx) => Ok(true),
            (Type::Circ(e1), Type::Circ(e2)) => {
                index_eq(e1, e2, &mut Fuel::new(self.index_fuel)).map_err(|err| self.indecision(err, e1, e2))
            }
            (Type::Pi(x, d1, c1), Type::Pi(y, d2, c2)) => {
                if !self.type_eq(d1, d2)? {
                    return Ok(false);
                }
                if x == y {
                    return self.type_eq(c1, c2);
                }
                let mut avoid = free_vars_type(c1);
                avoid.extend(free_vars_type(c2));
                let z = Term::Var(fresh_name_avoiding(x, &avoid));
                self.type_eq(&subst_type(c1, x, &z), &subst_type(c2, y, &z))
            }
            _ => Ok(false),
        }
    }

    fn indecision(&self, err: IndexError, e1: &Term, e2: &Term) -> TypeError {
        TypeError::new(
            TypeErrorKind::IndexIndecision,
            "P2",
            None,
            format!("comparing `{e1}` with `{e2}`: {err}"),
        )
    }

    fn wf_type(&self, b: &Base, ty: &Type, span: Option<Span>, rule: &'static str) -> Result<Type, TypeError> {
        match ty {
            Type::Nat => Ok(Type::Nat),
            Type::Idx => Ok(Type::Idx),
            Type::Circ(e) => {
                let ob = Obligation {
                    base: b.clone(),
                    subject: (**e).clone(),
                    expected: Type::Idx,
                };
                self.discharge(&ob).map(Type::circ).map_err(|inner| {
                    let mut err = TypeError::new(
                        TypeErrorKind::ObligationFailure,
                        rule,
                        span.or(inner.span),
                        format!("index `{}` of a circuit type is not an Idx: {}", e, inner.message),
                    );
                    err.expected = Some(Type::Idx);
                    err.found = inner.found;
                    err
                })
            }
            Type::Pi(x, dom, cod) => {
                let dom = self.wf_type(b, dom, span, rule)?;
                let (x, cod) = binder_outside(b, x, cod, &BTreeSet::new());
                let inner = b.extend(x.clone(), dom.clone()).expect("binder is fresh");
                let cod = self.wf_type(&inner, &cod, span, rule)?;
                Ok(Type::pi(x, dom, cod))
            }
        }
    }

    fn infer_at(&self, b: &Base, t: &Term, span: Option<Span>) -> Result<(Term, Type), TypeError> {
        use TypeErrorKind::*;
        match t {
            Term::Located(sp, inner) => self.infer_at(b, inner, Some(*sp)),
            Term::Var(x) => match b.lookup(x) {
                Some(ty) => Ok((t.clone(), ty.clone())),
                None => Err(TypeError::new(Unbound, "P0", span, format!("`{x}` is not bound"))),
            },
            Term::Lam(x, ann, body) => {
                let ann = self.wf_type(b, ann, span, "P1")?;
                let (x, body) = if b.contains(x) {
                    let mut avoid = b.names();
                    avoid.extend(free_vars(body));
                    let fresh = fresh_name_avoiding(x, &avoid);
                    let renamed = subst_term(body, x, &Term::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (x.clone(), (**body).clone())
                };
                let inner = b.extend(x.clone(), ann.clone()).expect("binder is fresh");
                let (body, cod) = self.infer_at(&inner, &body, span)?;
                Ok((Term::lam(x.clone(), ann.clone(), body), Type::pi(x, ann, cod)))
            }
            Term::App(f, a) => {
                let (f, fty) = self.infer_at(b, f, span)?;
                let Type::Pi(x, dom, cod) = fty else {
                    return Err(TypeError::new(
                        Mismatch,
                        "P2",
                        span,
                        format!("`{f}` is applied but is not a function"),
                    )
                    .with_types(None, Some(&fty)));
                };
                let a = self.check_at(b, a, &dom, span, "P2")?;
                let ty = subst_type(&cod, &x, &a);
                Ok((Term::app(f, a), ty))
            }
            Term::Num(_) => Ok((t.clone(), Type::Idx)),
            Term::Succ | Term::Pred => Ok((t.clone(), nat_to_nat())),
            Term::Get | Term::Set => Ok((t.clone(), Type::arrow(Type::Nat, nat_to_nat()))),
            Term::Fix(sigma) => {
                let sigma = self.wf_type(b, sigma, span, "P6")?;
                if !matches!(sigma.result(), Type::Nat | Type::Circ(_)) {
                    return Err(TypeError::new(
                        FixRestriction,
                        "P6",
                        span,
                        format!(
                            "fix[{}] must produce Nat or a circuit after its arguments",
                            display_type(&sigma)
                        ),
                    )
                    .with_types(None, Some(&sigma)));
                }
                let ty = Type::arrow(Type::arrow(sigma.clone(), sigma.clone()), sigma.clone());
                Ok((Term::fix(sigma), ty))
            }
            Term::If(c, l, r) => {
                let c = self.check_at(b, c, &Type::Nat, span, "P5")?;
                let (l, lty) = self.infer_at(b, l, span)?;
                match lty {
                    Type::Circ(_) => {
                        let r = self.check_at(b, r, &lty, span, "P5'")?;
                        Ok((Term::if_(c, l, r), lty))
                    }
                    Type::Nat | Type::Idx => {
                        let r = self.check_at(b, r, &Type::Nat, span, "P5")?;
                        Ok((Term::if_(c, l, r), Type::Nat))
                    }
                    Type::Pi(..) => Err(TypeError::new(
                        Mismatch,
                        "P5",
                        span,
                        "conditional branches must be numbers or circuits",
                    )
                    .with_types(None, Some(&lty))),
                }
            }
            Term::Gate(g) => match self.gates.arity_class(g) {
                Some(k) => Ok((t.clone(), Type::circ_n(u64::from(k)))),
                None => Err(TypeError::new(UnknownGate, "C1", span, format!("no gate named `{g}`"))),
            },
            Term::Seq(x, y) => {
                let (x, e0) = self.infer_circuit(b, x, span, "C2")?;
                let ty = Type::circ(e0);
                let y = self.check_at(b, y, &ty, span, "C2")?;
                Ok((Term::seq(x, y), ty))
            }
            Term::Par(x, y) => {
                let (x, e0) = self.infer_circuit(b, x, span, "C3")?;
                let (y, e1) = self.infer_circuit(b, y, span, "C3")?;
                Ok((Term::par(x, y), Type::circ(Term::add(Term::add(e0, e1), Term::num(1)))))
            }
            Term::Reverse(x) => {
                let (x, e) = self.infer_circuit(b, x, span, "C4")?;
                Ok((Term::reverse(x), Type::circ(e)))
            }
            Term::Iter(n, x, y) => {
                let (n, nty) = self.infer_at(b, n, span)?;
                if nty != Type::Idx {
                    return Err(TypeError::new(Mismatch, "C5", span, "the iteration count must be an index")
                        .with_types(Some(&Type::Idx), Some(&nty)));
                }
                let (x, e0) = self.infer_circuit(b, x, span, "C5")?;
                let (y, e1) = self.infer_circuit(b, y, span, "C5")?;
                let e = Term::add(e0, Term::mul(Term::add(Term::num(1), e1), n.clone()));
                Ok((Term::iter(n, x, y), Type::circ(e)))
            }
            Term::Op(op, x, y) => {
                let (x, xt) = self.infer_at(b, x, span)?;
                let (y, yt) = self.infer_at(b, y, span)?;
                let ty = match (&xt, &yt) {
                    (Type::Idx, Type::Idx) => Type::Idx,
                    (Type::Idx | Type::Nat, Type::Idx | Type::Nat) => Type::Nat,
                    _ => {
                        let bad = if matches!(xt, Type::Idx | Type::Nat) { &yt } else { &xt };
                        return Err(TypeError::new(
                            Mismatch,
                            "I2",
                            span,
                            format!("operands of `{}` must be numbers", op.symbol()),
                        )
                        .with_types(Some(&Type::Nat), Some(bad)));
                    }
                };
                Ok((Term::Op(*op, Box::new(x), Box::new(y)), ty))
            }
            Term::Size(x, _) => {
                let (x, e) = self.infer_circuit(b, x, span, "I3")?;
                Ok((Term::Size(Box::new(x), Some(Box::new(e))), Type::Idx))
            }
            Term::DMeas(s, c, _) => {
                let s = self.check_at(b, s, &Type::Nat, span, "M")?;
                let (c, e) = self.infer_circuit(b, c, span, "M")?;
                Ok((Term::DMeas(Box::new(s), Box::new(c), Some(Box::new(e))), Type::Nat))
            }
        }
    }

    fn infer_circuit(
        &self,
        b: &Base,
        t: &Term,
        span: Option<Span>,
        rule: &'static str,
    ) -> Result<(Term, Term), TypeError> {
        let span = located_span(t).or(span);
        let (t, ty) = self.infer_at(b, t, span)?;
        match ty {
            Type::Circ(e) => Ok((t, *e)),
            other => Err(TypeError::new(
                TypeErrorKind::Mismatch,
                rule,
                span,
                format!("`{t}` must be a circuit"),
            )
            .with_types(None, Some(&other))),
        }
    }

    fn check_at(
        &self,
        b: &Base,
        t: &Term,
        expected: &Type,
        span: Option<Span>,
        rule: &'static str,
    ) -> Result<Term, TypeError> {
        let span = located_span(t).or(span);
        if let (Term::Lam(x, ann, body), Type::Pi(y, dom, cod)) = (t.unlocated(), expected) {
            // Check the body against the codomain so (I0) applies under the binder.
            let ann = self.wf_type(b, ann, span, "P1")?;
            let same_domain = self.type_eq(&ann, dom).map_err(|mut e| {
                e.rule = rule;
                e.span = span;
                e
            })?;
            if same_domain {
                let (x, body) = if b.contains(x) {
                    let mut avoid = b.names();
                    avoid.extend(free_vars(body));
                    let fresh = fresh_name_avoiding(x, &avoid);
                    let renamed = subst_term(body, x, &Term::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (x.clone(), (**body).clone())
                };
                let cod = if x == *y { (**cod).clone() } else { subst_type(cod, y, &Term::Var(x.clone())) };
                let inner = b.extend(x.clone(), ann.clone()).expect("binder is fresh");
                let body = self.check_at(&inner, &body, &cod, span, rule)?;
                return Ok(Term::lam(x, ann, body));
            }
        }
        let (term, found) = self.infer_at(b, t, span)?;
        if matches!((&found, expected), (Type::Idx, Type::Nat)) {
            return Ok(term);
        }
        let equal = self.type_eq(&found, expected).map_err(|mut e| {
            e.rule = rule;
            e.span = span;
            e
        })?;
        if equal {
            return Ok(term);
        }
        let err = match (&found, expected) {
            (Type::Circ(f), Type::Circ(e)) => TypeError::new(
                TypeErrorKind::IndexInequality,
                rule,
                span,
                format!(
                    "`{}` has circuit index `{}`, expected `{}`",
                    term,
                    normal_form_text(f),
                    normal_form_text(e)
                ),
            ),
            _ => TypeError::new(TypeErrorKind::Mismatch, rule, span, format!("`{term}` has the wrong type")),
        };
        Err(err.with_types(Some(expected), Some(&found)))
    }
}

fn located_span(t: &Term) -> Option<Span> {
    match t {
        Term::Located(sp, _) => Some(*sp),
        _ => None,
    }
}

fn normal_form_text(e: &Term) -> String {
    match normalize_index(e, &mut Fuel::new(DEFAULT_INDEX_FUEL)) {
        Ok(p) => p.to_string(),
        Err(_) => e.to_string(),
    }
}

/// Rewrites every circuit index into its polynomial normal form.
pub fn normalize_type(ty: &Type) -> Type {
    match ty {
        Type::Nat | Type::Idx => ty.clone(),
        Type::Circ(e) => match normalize_index(e, &mut Fuel::new(DEFAULT_INDEX_FUEL)) {
            Ok(p) => Type::circ(p.to_term()),
            Err(_) => ty.clone(),
        },
        Type::Pi(x, d, c) => Type::pi(x.clone(), normalize_type(d), normalize_type(c)),
    }
}

/// A type as printed to users: indexes in normal form.
pub fn display_type(ty: &Type) -> String {
    normalize_type(ty).to_string()
}

/// Infers a closed term with the given gates.
pub fn infer_closed(gates: &GateRegistry, t: &Term) -> Result<Typed, TypeError> {
    Checker::new(gates).infer(&Base::new(), t)
}
