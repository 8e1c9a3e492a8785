//! Concrete syntax of `.qpcf` files: lexer, recursive-descent parser and a
//! pretty-printer producing text the parser accepts back.
//!
//! ```text
//! program  := ("def" ident "=" expr)* ("main" expr)?  |  expr
//! expr     := "fn" ident ":" type "." expr | par
//! par      := seq ("||" seq)*
//! seq      := sum (";" sum)*
//! sum      := prod ("+" prod)*
//! prod     := app ("*" app)*
//! app      := "if" atom atom atom | "iter" atom atom atom
//!           | "reverse" atom | "size" atom | atom atom*
//! atom     := ident | numeral | "(" expr ")" | "succ" | "pred" | "get" | "set"
//!           | "fix" "[" type "]" | "dmeas" "(" expr "," expr ")"
//! type     := "Pi" ident ":" type "." type | tatom ("->" type)?
//! tatom    := "Nat" | "Idx" | "Circ" "(" expr ")" | "(" type ")"
//! ```
//!
//! Capitalized identifiers that are neither bound nor defined name gates.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

use crate::ast::{free_vars_type, subst_term, IndexOp, Span, Term, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub name: String,
    pub body: Term,
    pub span: Span,
}

/// A parsed file: named definitions in order, then an optional main term.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SourceProgram {
    pub definitions: Vec<Definition>,
    pub main: Option<Term>,
}

impl SourceProgram {
    /// The main term with every definition (those of `outer` first) inlined.
    pub fn inlined_main(&self, outer: &[Definition]) -> Option<Term> {
        let main = self.main.as_ref()?;
        let defs: Vec<&Definition> = outer.iter().chain(self.definitions.iter()).collect();
        Some(inline_definitions(main, &defs))
    }

    /// A definition of this program with all earlier definitions inlined.
    pub fn inlined_definition(&self, name: &str, outer: &[Definition]) -> Option<Term> {
        let pos = self.definitions.iter().position(|d| d.name == name)?;
        let defs: Vec<&Definition> = outer
            .iter()
            .chain(self.definitions[..pos].iter())
            .collect();
        Some(inline_definitions(&self.definitions[pos].body, &defs))
    }

    pub fn definition_names(&self) -> Vec<String> {
        self.definitions.iter().map(|d| d.name.clone()).collect()
    }
}

/// Substitutes definitions into `term`, latest first, so that each body is
/// itself expanded by the definitions preceding it.
fn inline_definitions(term: &Term, defs: &[&Definition]) -> Term {
    defs.iter()
        .rev()
        .fold(term.clone(), |acc, d| subst_term(&acc, &d.name, &d.body))
}

impl std::error::Error for ParseError {}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigUint),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("numeral `{n}`"),
            Tok::Kw(k) => format!("`{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "fn", "fix", "if", "pred", "succ", "get", "set", "iter", "reverse", "size", "dmeas", "def",
    "main", "Nat", "Idx", "Circ", "Pi",
];

const SYMBOLS: &[&str] = &["||", "->", "(", ")", "[", "]", ":", ".", ";", "+", "*", "=", ","];

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    'outer: while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits.parse::<BigUint>().expect("digit run is a numeral");
            out.push((Tok::Num(n), span));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push((tok, span));
            continue;
        }
        for sym in SYMBOLS {
            let len = sym.chars().count();
            if chars[i..].iter().take(len).copied().eq(sym.chars()) {
                for _ in 0..len {
                    { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
                }
                out.push((Tok::Sym(sym), span));
                continue 'outer;
            }
        }
        return Err(ParseError {
            span,
            message: format!("unexpected character `{c}`"),
            expected: Vec::new(),
        });
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    /// Names bound by enclosing binders.
    bound: Vec<String>,
    /// Definition names visible at the current point.
    defined: BTreeSet<String>,
    /// Open `expr`/`ty` calls, bounded by `MAX_NESTING`.
    depth: usize,
}

/// Deepest bracket and binder nesting the parser accepts.
pub const MAX_NESTING: usize = 128;

type PResult<T> = Result<T, ParseError>;

fn is_gate_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_uppercase())
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            span: self.span(),
            message: format!("unexpected {}", self.peek().describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(t) if *t == k)
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.at_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&[s])
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut prog = SourceProgram::default();
        if !self.at_kw("def") && !self.at_kw("main") {
            if *self.peek() != Tok::Eof {
                prog.main = Some(self.expr()?);
            }
            return self.finish(prog);
        }
        while self.at_kw("def") {
            let span = self.span();
            self.bump();
            let name = self.expect_ident()?;
            if prog.definitions.iter().any(|d| d.name == name) {
                return Err(ParseError {
                    span,
                    message: format!("duplicate definition `{name}`"),
                    expected: Vec::new(),
                });
            }
            self.expect_sym("=")?;
            let body = self.expr()?;
            self.defined.insert(name.clone());
            prog.definitions.push(Definition { name, body, span });
        }
        if self.at_kw("main") {
            self.bump();
            prog.main = Some(self.expr()?);
        }
        self.finish(prog)
    }

    fn finish(&mut self, prog: SourceProgram) -> PResult<SourceProgram> {
        if *self.peek() == Tok::Eof {
            Ok(prog)
        } else {
            self.error(&["def", "main", "end of input"])
        }
    }

    fn enter(&mut self) -> PResult<()> {
        if self.depth >= MAX_NESTING {
            return Err(ParseError {
                span: self.span(),
                message: format!("nesting deeper than {MAX_NESTING}"),
                expected: Vec::new(),
            });
        }
        self.depth += 1;
        Ok(())
    }

    fn expr(&mut self) -> PResult<Term> {
        self.enter()?;
        let t = self.expr_inner();
        self.depth -= 1;
        t
    }

    fn expr_inner(&mut self) -> PResult<Term> {
        if self.at_kw("fn") {
            let span = self.span();
            self.bump();
            let name = self.expect_ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(".")?;
            self.bound.push(name.clone());
            let body = self.expr();
            self.bound.pop();
            return Ok(Term::Located(span, Box::new(Term::lam(name, ty, body?))));
        }
        self.par()
    }

    fn binary(
        &mut self,
        sym: &str,
        next: fn(&mut Self) -> PResult<Term>,
        build: fn(Term, Term) -> Term,
    ) -> PResult<Term> {
        let span = self.span();
        let mut lhs = next(self)?;
        while self.at_sym(sym) {
            self.bump();
            let rhs = next(self)?;
            lhs = Term::Located(span, Box::new(build(lhs, rhs)));
        }
        Ok(lhs)
    }

    fn par(&mut self) -> PResult<Term> {
        self.binary("||", Self::seq, Term::par)
    }

    fn seq(&mut self) -> PResult<Term> {
        self.binary(";", Self::sum, Term::seq)
    }

    fn sum(&mut self) -> PResult<Term> {
        self.binary("+", Self::prod, Term::add)
    }

    fn prod(&mut self) -> PResult<Term> {
        self.binary("*", Self::app, Term::mul)
    }

    fn app(&mut self) -> PResult<Term> {
        let span = self.span();
        let loc = |t: Term| Term::Located(span, Box::new(t));
        if self.at_kw("if") {
            self.bump();
            let (c, l, r) = (self.atom()?, self.atom()?, self.atom()?);
            return Ok(loc(Term::if_(c, l, r)));
        }
        if self.at_kw("iter") {
            self.bump();
            let (n, a, b) = (self.atom()?, self.atom()?, self.atom()?);
            return Ok(loc(Term::iter(n, a, b)));
        }
        if self.at_kw("reverse") {
            self.bump();
            return Ok(loc(Term::reverse(self.atom()?)));
        }
        if self.at_kw("size") {
            self.bump();
            return Ok(loc(Term::size(self.atom()?)));
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = loc(Term::app(head, arg));
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) | Tok::Num(_) => true,
            Tok::Sym(s) => *s == "(",
            Tok::Kw(k) => matches!(*k, "succ" | "pred" | "get" | "set" | "fix" | "dmeas"),
            Tok::Eof => false,
        }
    }

    const ATOM_START: &'static [&'static str] = &[
        "identifier",
        "numeral",
        "(",
        "succ",
        "pred",
        "get",
        "set",
        "fix",
        "dmeas",
    ];

    fn atom(&mut self) -> PResult<Term> {
        let span = self.span();
        let loc = |t: Term| Term::Located(span, Box::new(t));
        let t = match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                let bound = self.bound.iter().any(|b| *b == name) || self.defined.contains(&name);
                if !bound && is_gate_name(&name) {
                    Term::Gate(name)
                } else {
                    Term::Var(name)
                }
            }
            Tok::Num(n) => {
                self.bump();
                Term::Num(n)
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_sym(")")?;
                return Ok(inner);
            }
            Tok::Kw("succ") => {
                self.bump();
                Term::Succ
            }
            Tok::Kw("pred") => {
                self.bump();
                Term::Pred
            }
            Tok::Kw("get") => {
                self.bump();
                Term::Get
            }
            Tok::Kw("set") => {
                self.bump();
                Term::Set
            }
            Tok::Kw("fix") => {
                self.bump();
                self.expect_sym("[")?;
                let ty = self.ty()?;
                self.expect_sym("]")?;
                Term::fix(ty)
            }
            Tok::Kw("dmeas") => {
                self.bump();
                self.expect_sym("(")?;
                let state = self.expr()?;
                self.expect_sym(",")?;
                let circ = self.expr()?;
                self.expect_sym(")")?;
                Term::dmeas(state, circ)
            }
            _ => return self.error(Self::ATOM_START),
        };
        Ok(loc(t))
    }

    fn ty(&mut self) -> PResult<Type> {
        self.enter()?;
        let t = self.ty_inner();
        self.depth -= 1;
        t
    }

    fn ty_inner(&mut self) -> PResult<Type> {
        if self.at_kw("Pi") {
            self.bump();
            let name = self.expect_ident()?;
            self.expect_sym(":")?;
            let dom = self.ty()?;
            self.expect_sym(".")?;
            self.bound.push(name.clone());
            let cod = self.ty();
            self.bound.pop();
            return Ok(Type::pi(name, dom, cod?));
        }
        let dom = self.ty_atom()?;
        if self.at_sym("->") {
            self.bump();
            let cod = self.ty()?;
            return Ok(Type::arrow(dom, cod));
        }
        Ok(dom)
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::Kw("Nat") => {
                self.bump();
                Ok(Type::Nat)
            }
            Tok::Kw("Idx") => {
                self.bump();
                Ok(Type::Idx)
            }
            Tok::Kw("Circ") => {
                self.bump();
                self.expect_sym("(")?;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(Type::circ(e))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.error(&["Nat", "Idx", "Circ", "Pi", "("]),
        }
    }
}

fn parser_for(text: &str, known: &[String]) -> PResult<Parser> {
    Ok(Parser {
        toks: lex(text)?,
        pos: 0,
        bound: Vec::new(),
        defined: known.iter().cloned().collect(),
        depth: 0,
    })
}

/// Parses a whole `.qpcf` file.
pub fn parse(text: &str) -> Result<SourceProgram, ParseError> {
    parse_with_definitions(text, &[])
}

/// Parses a file that may refer to definitions made elsewhere (the prelude).
pub fn parse_with_definitions(text: &str, known: &[String]) -> Result<SourceProgram, ParseError> {
    parser_for(text, known)?.program()
}

/// Parses a single term with no surrounding definitions.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = parser_for(text, &[])?;
    let t = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error(&["end of input"]);
    }
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = parser_for(text, &[])?;
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.error(&["end of input"]);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Pretty printer

const LAMBDA: u8 = 0;
const PAR: u8 = 1;
const SEQ: u8 = 2;
const SUM: u8 = 3;
const PROD: u8 = 4;
const APP: u8 = 5;
const ATOM: u8 = 6;

fn level(t: &Term) -> u8 {
    match t.unlocated() {
        Term::Lam(..) => LAMBDA,
        Term::Par(..) => PAR,
        Term::Seq(..) => SEQ,
        Term::Op(IndexOp::Add, ..) => SUM,
        Term::Op(IndexOp::Mul, ..) => PROD,
        Term::App(..) | Term::If(..) | Term::Iter(..) | Term::Reverse(..) | Term::Size(..) => APP,
        _ => ATOM,
    }
}

/// Renders a term in concrete syntax with minimal parentheses.
pub fn pretty(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, LAMBDA, &mut out);
    out
}

pub fn pretty_type(ty: &Type) -> String {
    let mut out = String::new();
    write_type(ty, false, &mut out);
    out
}

fn write_term(t: &Term, min: u8, out: &mut String) {
    let t = t.unlocated();
    if level(t) < min {
        out.push('(');
        write_term(t, LAMBDA, out);
        out.push(')');
        return;
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Gate(g) => out.push_str(g),
        Term::Num(n) => out.push_str(&n.to_string()),
        Term::Succ => out.push_str("succ"),
        Term::Pred => out.push_str("pred"),
        Term::Get => out.push_str("get"),
        Term::Set => out.push_str("set"),
        Term::Fix(ty) => {
            out.push_str("fix[");
            write_type(ty, false, out);
            out.push(']');
        }
        Term::DMeas(s, c, _) => {
            out.push_str("dmeas(");
            write_term(s, LAMBDA, out);
            out.push_str(", ");
            write_term(c, LAMBDA, out);
            out.push(')');
        }
        Term::Lam(x, ty, body) => {
            out.push_str("fn ");
            out.push_str(x);
            out.push(':');
            write_type(ty, false, out);
            out.push_str(". ");
            write_term(body, LAMBDA, out);
        }
        Term::Par(a, b) => infix(a, " || ", b, PAR, out),
        Term::Seq(a, b) => infix(a, " ; ", b, SEQ, out),
        Term::Op(IndexOp::Add, a, b) => infix(a, " + ", b, SUM, out),
        Term::Op(IndexOp::Mul, a, b) => infix(a, " * ", b, PROD, out),
        Term::App(f, a) => {
            let fmin = if matches!(f.unlocated(), Term::App(..)) { APP } else { ATOM };
            write_term(f, fmin, out);
            out.push(' ');
            write_term(a, ATOM, out);
        }
        Term::If(c, l, r) => prefix("if", &[c, l, r], out),
        Term::Iter(n, a, b) => prefix("iter", &[n, a, b], out),
        Term::Reverse(c) => prefix("reverse", &[c], out),
        Term::Size(c, _) => prefix("size", &[c], out),
        Term::Located(..) => unreachable!("unlocated"),
    }
}

fn infix(a: &Term, op: &str, b: &Term, lvl: u8, out: &mut String) {
    write_term(a, lvl, out);
    out.push_str(op);
    write_term(b, lvl + 1, out);
}

fn prefix(kw: &str, args: &[&Term], out: &mut String) {
    out.push_str(kw);
    for a in args {
        out.push(' ');
        write_term(a, ATOM, out);
    }
}

fn write_type(ty: &Type, as_domain: bool, out: &mut String) {
    match ty {
        Type::Nat => out.push_str("Nat"),
        Type::Idx => out.push_str("Idx"),
        Type::Circ(e) => {
            out.push_str("Circ(");
            write_term(e, LAMBDA, out);
            out.push(')');
        }
        Type::Pi(x, d, c) => {
            if as_domain {
                out.push('(');
            }
            if free_vars_type(c).contains(x) {
                out.push_str("Pi ");
                out.push_str(x);
                out.push(':');
                write_type(d, false, out);
                out.push_str(". ");
                write_type(c, false, out);
            } else {
                write_type(d, true, out);
                out.push_str(" -> ");
                write_type(c, false, out);
            }
            if as_domain {
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_type(self))
    }
}
