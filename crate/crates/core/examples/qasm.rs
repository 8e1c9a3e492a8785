//! OpenQASM 2.0 export of evaluated circuits.
//!
//! cargo run --example qasm

use qpcf::qasm::emit_qasm;
use qpcf::Session;

fn main() {
    let session = Session::new();
    for program in ["epr", "djminus 3 djbalanced3", "reverse (H ; S ; T)", "grover3 ORACLE011"] {
        let circuit = session.circuit(program).expect("evaluates");
        println!("// {program}");
        match emit_qasm(&circuit) {
            Ok(text) => print!("{text}"),
            Err(e) => println!("// not exported: {e}"),
        }
        println!();
    }
}
