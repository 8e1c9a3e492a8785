//! Bell pair: type, circuit, exact distribution and seeded samples.
//!
//! cargo run --example epr

use qpcf::typecheck::display_type;
use qpcf::{Session, Value};

fn main() {
    let session = Session::new();

    let ty = session.check("epr").expect("epr type-checks").ty;
    println!("epr : {}", display_type(&ty));
    println!("epr = {}", session.circuit("epr").expect("epr evaluates"));

    let program = "dmeas(0, epr)";
    let dist = session.dist(program).expect("distribution");
    for (value, mass) in &dist.masses {
        println!("  {value}: {mass}");
    }
    println!("  residual: {}", dist.residual);

    let runs = 1000;
    let zeros = (0..runs)
        .filter(|&seed| session.run(program, seed).unwrap().value == Value::num(0))
        .count();
    println!("{zeros}/{runs} seeded runs measured 00");
}
