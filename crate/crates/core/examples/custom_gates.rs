//! Registering gates from a gate file and reversing circuits built from them.
//!
//! cargo run --example custom_gates

use qpcf::qsim::{hilb, parse_gate_file, DEFAULT_MAX_WIRES};
use qpcf::Session;

const GATES: &str = "\
# Square root of X and its adjoint.
gate SX arity 0 adjoint SXdg
row 0.5+0.5i 0.5-0.5i
row 0.5-0.5i 0.5+0.5i
gate SXdg arity 0 adjoint SX
row 0.5-0.5i 0.5+0.5i
row 0.5+0.5i 0.5-0.5i
";

fn main() {
    let mut session = Session::new();
    session
        .register_gates(parse_gate_file(GATES).expect("gate file parses"))
        .expect("gates are unitary with matching adjoints");

    let sx2 = session.circuit("SX ; SX").unwrap();
    let x = session.circuit("X").unwrap();
    let same = hilb(&sx2, session.gates(), DEFAULT_MAX_WIRES)
        .unwrap()
        .approx_eq(&hilb(&x, session.gates(), DEFAULT_MAX_WIRES).unwrap(), 1e-12);
    println!("SX ; SX acts as X: {same}");

    let c = session.circuit("(SX || H) ; CNOT").unwrap();
    let r = session.circuit("reverse ((SX || H) ; CNOT)").unwrap();
    println!("{c}\nreversed: {r}");
    let u = hilb(&c, session.gates(), DEFAULT_MAX_WIRES).unwrap();
    let v = hilb(&r, session.gates(), DEFAULT_MAX_WIRES).unwrap();
    println!("reverse is the adjoint: {}", v.approx_eq(&u.adjoint(), 1e-12));

    // Gates outside the registry are a type error.
    println!("{}", session.check("SY").unwrap_err());
}
