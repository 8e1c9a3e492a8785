//! Definitions and gates shipped with the language.

use crate::ast::{Base, Term, Type};
use crate::parser::{parse, parse_type, pretty, Definition};
use crate::qsim::{parse_gate_file, GateDef, GateRegistry};
use crate::typecheck::{display_type, Checker, TypeError, TypeErrorKind};

pub const PRELUDE_SOURCE: &str = include_str!("../prelude/prelude.qpcf");
pub const GROVER3_GATES: &str = include_str!("../prelude/grover3.gates");

/// Declared type and a short description of every prelude definition.
const DECLARED: &[(&str, &str, &str)] = &[
    ("mseq", "Pi k:Idx. Circ(k) -> Nat -> Circ(k)", "n+1 copies of a circuit in sequence"),
    (
        "mpar",
        "Pi k:Idx. Pi h:Idx. Pi x:Idx. Circ(k) -> Circ(h) -> Circ(k + (x * (h + 1)))",
        "a circuit under x parallel copies of another",
    ),
    ("epr", "Circ(1)", "Bell-state preparation"),
    ("djminus", "Pi x:Idx. Circ(x) -> Circ(x)", "Deutsch-Jozsa circuit around an oracle"),
    ("djrun", "Pi n:Idx. Circ(n) -> Nat", "measured Deutsch-Jozsa run"),
    ("djconstant3", "Circ(3)", "constant oracle on three inputs"),
    ("djbalanced3", "Circ(3)", "parity oracle on three inputs"),
    ("monus", "Nat -> Nat -> Nat", "truncated subtraction"),
    ("isqrt", "Nat -> Nat", "integer square root"),
    ("grover", "Pi x:Idx. Circ(x) -> Circ(x) -> Circ(x)", "Grover search from diffusion and oracle"),
    ("grover3", "Circ(3) -> Circ(3)", "three-qubit Grover search"),
    ("grover3run", "Nat", "three-qubit search for 011"),
];

#[derive(Debug, Clone)]
pub struct PreludeEntry {
    pub name: &'static str,
    /// The definition body as written, pretty-printed.
    pub source: String,
    /// The body with every earlier definition inlined.
    pub term: Term,
    pub declared_type: Type,
    pub note: &'static str,
}

/// The prelude definitions in file order.
pub fn prelude_definitions() -> Vec<Definition> {
    parse(PRELUDE_SOURCE)
        .expect("the prelude parses")
        .definitions
}

pub fn prelude_gates() -> Vec<GateDef> {
    parse_gate_file(GROVER3_GATES).expect("the prelude gate file parses")
}

/// Built-in gates plus the prelude gates.
pub fn prelude_registry() -> GateRegistry {
    let mut reg = GateRegistry::builtin();
    reg.register_batch(prelude_gates())
        .expect("prelude gates are valid");
    reg
}

pub fn prelude_programs() -> Vec<PreludeEntry> {
    let program = parse(PRELUDE_SOURCE).expect("the prelude parses");
    DECLARED
        .iter()
        .map(|&(name, ty, note)| {
            let def = program
                .definitions
                .iter()
                .find(|d| d.name == name)
                .expect("declared entries exist in the prelude");
            PreludeEntry {
                name,
                source: pretty(&def.body.strip_locations()),
                term: program
                    .inlined_definition(name, &[])
                    .expect("definition exists"),
                declared_type: parse_type(ty).expect("declared types parse").strip_locations(),
                note,
            }
        })
        .collect()
}

/// Checks an entry against its declared type, returning the inferred type.
pub fn check_entry(entry: &PreludeEntry, gates: &GateRegistry) -> Result<Type, TypeError> {
    let checker = Checker::new(gates);
    let typed = checker.infer(&Base::new(), &entry.term)?;
    if checker.type_eq(&typed.ty, &entry.declared_type)? {
        Ok(typed.ty)
    } else {
        Err(TypeError {
            kind: TypeErrorKind::Mismatch,
            rule: "P0",
            span: None,
            expected: Some(entry.declared_type.clone()),
            found: Some(typed.ty.clone()),
            message: format!(
                "`{}` has type {}, declared {}",
                entry.name,
                display_type(&typed.ty),
                display_type(&entry.declared_type)
            ),
        })
    }
}
