//! Index expressions as polynomials: the decision procedure behind
//! `Circ(E)` equality.
//!
//! cargo run --example index_arithmetic

use qpcf::index::{index_eq, normalize_index, Fuel, DEFAULT_INDEX_FUEL};
use qpcf::parser::parse_term;

fn main() {
    for src in [
        "(x + 1) * (y + 1)",
        "(fn z:Idx. z * z + z) (a + 1)",
        "2 * (x + 3) + x * 0",
        "size H + size CNOT",
    ] {
        let e = parse_term(src).unwrap();
        let mut fuel = Fuel::new(DEFAULT_INDEX_FUEL);
        match normalize_index(&e, &mut fuel) {
            Ok(p) => println!("{src}\n  = {p}   ({} steps)", DEFAULT_INDEX_FUEL - fuel.remaining()),
            Err(err) => println!("{src}\n  ! {err}"),
        }
    }

    let pairs = [("x * (y + z)", "z * x + x * y"), ("x + x", "2 * x"), ("x * x", "2 * x")];
    for (a, b) in pairs {
        let mut fuel = Fuel::new(DEFAULT_INDEX_FUEL);
        let eq = index_eq(&parse_term(a).unwrap(), &parse_term(b).unwrap(), &mut fuel).unwrap();
        println!("{a}  ==  {b} : {eq}");
    }
}
