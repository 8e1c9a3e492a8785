//! `size` reads the arity off the type, so a non-terminating circuit
//! argument is never evaluated.
//!
//! cargo run --example size_divergence

use qpcf::eval::EvalError;
use qpcf::{Error, Session};

fn main() {
    let session = Session::new();

    let program = "size (fix[Circ(8)] (fn x:Circ(8). x))";
    let out = session.run(program, 0).expect("size terminates");
    println!("{program}\n  => {} (p={})", out.value, out.probability);

    // Demanding the circuit itself runs out of fuel.
    let forced = "dmeas(0, fix[Circ(8)] (fn x:Circ(8). x))";
    match session.run(forced, 0) {
        Err(Error::Eval(EvalError::Divergence { steps })) => {
            println!("{forced}\n  => diverged after {steps} steps")
        }
        other => println!("{forced}\n  => unexpected {other:?}"),
    }
}
