//! OpenQASM 2.0 output for evaluated circuits.
//!
//! Wire 0 (the top wire) is `q[0]`. `I` emits nothing.

use std::fmt::Write;

use crate::circuit::{CircuitKind, CircuitValue};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("gate `{0}` has no OpenQASM counterpart")]
pub struct UnmappableGate(pub String);

/// The qelib1 name of a gate, or `None` for the identity.
fn qasm_name(gate: &str) -> Result<Option<&'static str>, UnmappableGate> {
    Ok(Some(match gate {
        "I" => return Ok(None),
        "H" => "h",
        "X" => "x",
        "Y" => "y",
        "Z" => "z",
        "S" => "s",
        "Sdg" => "sdg",
        "T" => "t",
        "Tdg" => "tdg",
        "CNOT" => "cx",
        "CZ" => "cz",
        "SWAP" => "swap",
        "CCNOT" => "ccx",
        other => return Err(UnmappableGate(other.to_string())),
    }))
}

pub fn emit_qasm(c: &CircuitValue) -> Result<String, UnmappableGate> {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(out, "qreg q[{}];", c.wires()).expect("writing to a String");
    emit(c, 0, &mut out)?;
    Ok(out)
}

fn emit(c: &CircuitValue, top: u64, out: &mut String) -> Result<(), UnmappableGate> {
    match c.kind() {
        CircuitKind::Gate(g) => {
            if let Some(name) = qasm_name(g)? {
                let operands: Vec<String> = (top..top + c.wires()).map(|w| format!("q[{w}]")).collect();
                writeln!(out, "{name} {};", operands.join(",")).expect("writing to a String");
            }
        }
        CircuitKind::Seq(a, b) => {
            emit(a, top, out)?;
            emit(b, top, out)?;
        }
        CircuitKind::Par(a, b) => {
            emit(a, top, out)?;
            emit(b, top + a.wires(), out)?;
        }
    }
    Ok(())
}
