//! Exact output distributions with divergence mass.
//!
//! cargo run --example distribution

use qpcf::{EvalConfig, Session};

fn show(label: &str, dist: &qpcf::Distribution) {
    println!("{label}");
    for (value, mass) in &dist.masses {
        println!("  {value}: {mass}");
    }
    println!("  residual: {}", dist.residual);
}

fn main() {
    // Half the runs return 8, the other half loop forever.
    let m8 = "if dmeas(0, epr) 8 (fix[Nat] (fn x:Nat. x))";
    show(m8, &Session::new().dist(m8).unwrap());

    // Retrying until the coin lands: the mass on 8 approaches 1 as the
    // exploration depth grows.
    let retry = "fix[Nat] (fn m:Nat. if dmeas(0, epr) 8 m)";
    for depth in [1, 5, 20] {
        let session = Session::new().with_config(EvalConfig {
            max_branch_depth: depth,
            ..EvalConfig::default()
        });
        show(&format!("{retry}  [depth {depth}]"), &session.dist(retry).unwrap());
    }

    // Call-by-name: each use of the argument measures again.
    let twice = "(fn x:Nat. x + x) dmeas(0, epr)";
    show(twice, &Session::new().dist(twice).unwrap());
}
