//! Evaluated circuits: strings over gate names, `;` and `||`.

use std::fmt;
use std::sync::Arc;

use crate::ast::Term;
use crate::parser::pretty;

/// Circuits nested deeper than this are refused at construction. Every
/// structural operation on circuits recurses, so the bound keeps them off
/// the end of the stack.
pub const MAX_CIRCUIT_DEPTH: u32 = 2048;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("sequential composition of circuits on {0} and {1} wires")]
    WireMismatch(u64, u64),
    #[error("circuit nesting exceeds {MAX_CIRCUIT_DEPTH}")]
    TooDeep,
    #[error("circuit wire count overflows")]
    TooWide,
    #[error("gate `{0}` has no registered adjoint")]
    NoAdjoint(String),
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CircuitKind {
    Gate(String),
    Seq(CircuitValue, CircuitValue),
    Par(CircuitValue, CircuitValue),
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    kind: CircuitKind,
    wires: u64,
    depth: u32,
}

/// An immutable, cheaply clonable circuit string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircuitValue(Arc<Node>);

impl CircuitValue {
    /// A gate acting on `wires` wires.
    pub fn gate(name: impl Into<String>, wires: u64) -> CircuitValue {
        CircuitValue(Arc::new(Node {
            kind: CircuitKind::Gate(name.into()),
            wires,
            depth: 1,
        }))
    }

    pub fn seq(first: CircuitValue, second: CircuitValue) -> Result<CircuitValue, CircuitError> {
        if first.wires() != second.wires() {
            return Err(CircuitError::WireMismatch(first.wires(), second.wires()));
        }
        let wires = first.wires();
        Self::node(CircuitKind::Seq(first, second), wires)
    }

    pub fn par(top: CircuitValue, bottom: CircuitValue) -> Result<CircuitValue, CircuitError> {
        let wires = top
            .wires()
            .checked_add(bottom.wires())
            .ok_or(CircuitError::TooWide)?;
        Self::node(CircuitKind::Par(top, bottom), wires)
    }

    fn node(kind: CircuitKind, wires: u64) -> Result<CircuitValue, CircuitError> {
        let depth = match &kind {
            CircuitKind::Gate(_) => 1,
            CircuitKind::Seq(a, b) | CircuitKind::Par(a, b) => 1 + a.depth().max(b.depth()),
        };
        if depth > MAX_CIRCUIT_DEPTH {
            return Err(CircuitError::TooDeep);
        }
        Ok(CircuitValue(Arc::new(Node { kind, wires, depth })))
    }

    pub fn kind(&self) -> &CircuitKind {
        &self.0.kind
    }

    pub fn wires(&self) -> u64 {
        self.0.wires
    }

    pub fn depth(&self) -> u32 {
        self.0.depth
    }

    /// Gate names in left-to-right order of the string.
    pub fn gate_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_gates(&mut out);
        out
    }

    fn collect_gates<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self.kind() {
            CircuitKind::Gate(g) => out.push(g),
            CircuitKind::Seq(a, b) | CircuitKind::Par(a, b) => {
                a.collect_gates(out);
                b.collect_gates(out);
            }
        }
    }

    /// Reversal: every gate replaced by its adjoint, sequential order
    /// flipped, parallel order kept.
    pub fn reversed(
        &self,
        adjoint: &dyn Fn(&str) -> Option<String>,
    ) -> Result<CircuitValue, CircuitError> {
        match self.kind() {
            CircuitKind::Gate(g) => {
                let adj = adjoint(g).ok_or_else(|| CircuitError::NoAdjoint(g.clone()))?;
                Ok(CircuitValue::gate(adj, self.wires()))
            }
            CircuitKind::Seq(a, b) => CircuitValue::seq(b.reversed(adjoint)?, a.reversed(adjoint)?),
            CircuitKind::Par(a, b) => CircuitValue::par(a.reversed(adjoint)?, b.reversed(adjoint)?),
        }
    }

    pub fn to_term(&self) -> Term {
        match self.kind() {
            CircuitKind::Gate(g) => Term::gate(g.clone()),
            CircuitKind::Seq(a, b) => Term::seq(a.to_term(), b.to_term()),
            CircuitKind::Par(a, b) => Term::par(a.to_term(), b.to_term()),
        }
    }
}

impl fmt::Display for CircuitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(&self.to_term()))
    }
}
