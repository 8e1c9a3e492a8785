//! One-stop front end: gates, prelude, parsing, checking and evaluation.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Base, Term, Type};
use crate::circuit::CircuitValue;
use crate::eval::{eval_dist, eval_sample, Distribution, EvalConfig, EvalError, EvalOutcome, Value};
use crate::index::DEFAULT_INDEX_FUEL;
use crate::parser::{parse_with_definitions, Definition, ParseError};
use crate::prelude::{prelude_definitions, prelude_registry};
use crate::qsim::{load_gate_file, GateDef, GateFileError, GateRegistry, RegistryError};
use crate::typecheck::{display_type, Checker, TypeError, Typed};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("the program has no main term")]
    NoMain,
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("expected a circuit, found a term of type {0}")]
    NotACircuit(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    GateFile(#[from] GateFileError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Clone, Debug)]
pub struct Session {
    gates: GateRegistry,
    prelude: Vec<Definition>,
    index_fuel: u64,
    config: EvalConfig,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    /// Built-in and prelude gates, prelude definitions, default budgets.
    pub fn new() -> Self {
        Session {
            gates: prelude_registry(),
            prelude: prelude_definitions(),
            index_fuel: DEFAULT_INDEX_FUEL,
            config: EvalConfig::default(),
        }
    }

    /// Built-in gates only.
    pub fn without_prelude() -> Self {
        Session {
            gates: GateRegistry::builtin(),
            prelude: Vec::new(),
            ..Session::new()
        }
    }

    pub fn gates(&self) -> &GateRegistry {
        &self.gates
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    pub fn with_config(mut self, config: EvalConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_index_fuel(mut self, fuel: u64) -> Self {
        self.index_fuel = fuel;
        self
    }

    pub fn register_gates(&mut self, defs: Vec<GateDef>) -> Result<(), RegistryError> {
        self.gates.register_batch(defs)
    }

    pub fn load_gate_file(&mut self, path: &Path) -> Result<(), Error> {
        let defs = load_gate_file(path)?;
        self.register_gates(defs)?;
        Ok(())
    }

    /// Parses a program and inlines its definitions and the prelude's.
    pub fn parse(&self, src: &str) -> Result<Term, Error> {
        let known: Vec<String> = self.prelude.iter().map(|d| d.name.clone()).collect();
        let program = parse_with_definitions(src, &known)?;
        program.inlined_main(&self.prelude).ok_or(Error::NoMain)
    }

    pub fn check_term(&self, t: &Term) -> Result<Typed, Error> {
        Ok(Checker::new(&self.gates)
            .with_index_fuel(self.index_fuel)
            .infer(&Base::new(), t)?)
    }

    pub fn check(&self, src: &str) -> Result<Typed, Error> {
        self.check_term(&self.parse(src)?)
    }

    /// One derivation, with measurement outcomes drawn from `seed`.
    pub fn run(&self, src: &str, seed: u64) -> Result<EvalOutcome, Error> {
        let typed = self.check(src)?;
        self.sample(&typed.term, seed)
    }

    /// Samples an already checked term.
    pub fn sample(&self, term: &Term, seed: u64) -> Result<EvalOutcome, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(eval_sample(term, &self.gates, &self.config, &mut rng)?)
    }

    pub fn dist(&self, src: &str) -> Result<Distribution, Error> {
        let typed = self.check(src)?;
        Ok(eval_dist(&typed.term, &self.gates, &self.config)?)
    }

    /// Evaluates a circuit-typed program to its circuit.
    pub fn circuit(&self, src: &str) -> Result<CircuitValue, Error> {
        let typed = self.check(src)?;
        if !matches!(typed.ty, Type::Circ(_)) {
            return Err(Error::NotACircuit(display_type(&typed.ty)));
        }
        match self.sample(&typed.term, 0)?.value {
            Value::Circuit(c) => Ok(c),
            Value::Num(n) => Err(EvalError::Stuck(format!("circuit program produced {n}")).into()),
        }
    }
}
