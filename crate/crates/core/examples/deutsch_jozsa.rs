//! Deutsch-Jozsa on three inputs with a constant and a balanced oracle.
//!
//! The runner starts from the basis state with only the ancilla set and
//! measures every wire; the top three bits are the answer.
//!
//! cargo run --example deutsch_jozsa

use qpcf::{Session, Value};

fn top_bits_zero(dist: &qpcf::Distribution) -> f64 {
    dist.masses
        .iter()
        .filter(|(v, _)| matches!(v, Value::Num(n) if (n >> 1u32) == 0u32.into()))
        .fold(0.0, |acc, (_, p)| acc + p)
}

fn main() {
    let session = Session::new();
    for oracle in ["djconstant3", "djbalanced3"] {
        let program = format!("djrun 3 {oracle}");
        let dist = session.dist(&program).expect("runs");
        println!("{program}");
        for (value, mass) in &dist.masses {
            println!("  {value}: {mass:.6}");
        }
        println!("  mass on inputs 000: {:.6}", top_bits_zero(&dist));
    }
}
