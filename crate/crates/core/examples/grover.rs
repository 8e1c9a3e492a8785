//! Three-qubit Grover search for 011 with two amplification rounds.
//!
//! The oracle and diffusion gates come from the prelude gate file. The
//! ancilla ends in |-> so the answer is the marginal on the top three bits.
//!
//! cargo run --example grover

use qpcf::{Session, Value};

fn main() {
    let session = Session::new();
    println!("grover3 ORACLE011 = {}", session.circuit("grover3 ORACLE011").unwrap());

    let dist = session.dist("grover3run").expect("runs");
    let mut marginal = [0.0f64; 8];
    for (value, mass) in &dist.masses {
        if let Value::Num(n) = value {
            let n: u64 = n.try_into().expect("four-bit outcome");
            marginal[(n >> 1) as usize] += mass;
        }
    }
    for (x, p) in marginal.iter().enumerate() {
        println!("  {x:03b}: {p:.4}");
    }
    let theta = (1.0f64 / 8.0).sqrt().asin();
    println!("expected for 011: {:.4}", (5.0 * theta).sin().powi(2));
}
