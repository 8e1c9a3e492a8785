//! Dependent typing: arity arithmetic, size-dependent types and the
//! fixpoint restriction.
//!
//! cargo run --example typecheck

use qpcf::ast::Base;
use qpcf::parser::{parse_term, parse_type};
use qpcf::qsim::GateRegistry;
use qpcf::typecheck::{display_type, Checker};

fn main() {
    let gates = GateRegistry::builtin();
    let checker = Checker::new(&gates);

    let closed = [
        "(I || H) ; CNOT",
        "fn x:Idx. fn u:Circ(x). fn w:Circ(x). u ; reverse w",
        "fn x:Idx. iter x H CNOT",
        "fn c:Circ(2). iter (size c) c H",
        "fn c:Circ(2). c || size c",
        "fix[Idx] (fn x:Idx. x)",
        "H ; CNOT",
    ];
    for src in closed {
        let term = parse_term(src).expect("parses");
        match checker.infer(&Base::new(), &term) {
            Ok(typed) => println!("{src}\n  : {}", display_type(&typed.ty)),
            Err(e) => println!("{src}\n  ! {e}"),
        }
    }

    // Open terms are checked under a base of typed variables.
    let mut base = Base::new();
    for (name, ty) in [("x", "Pi z:Idx. Circ(z)"), ("k", "Idx"), ("h", "Idx")] {
        base = base.extend(name, parse_type(ty).unwrap()).unwrap();
    }
    for src in ["x (size (H || H))", "fn x:Idx. fn u:Circ(k). fn w:Circ(h). iter x u w"] {
        let typed = checker.infer(&base, &parse_term(src).unwrap()).expect("typed");
        println!("{src}\n  : {}", display_type(&typed.ty));
    }

    let a = parse_type("Circ(x * (y + 1))").unwrap();
    let b = parse_type("Circ(x + y * x)").unwrap();
    println!("Circ(x * (y + 1)) = Circ(x + y * x): {}", checker.type_eq(&a, &b).unwrap());
}
