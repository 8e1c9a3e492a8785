//! Gate registry: names, arity classes, unitaries and the adjoint map.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::matrix::Matrix;

/// Tolerance for the unitarity and adjoint checks at registration.
pub const UNITARY_TOL: f64 = 1e-10;

/// A gate in arity class `k`, acting on `k + 1` wires.
#[derive(Clone, Debug, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub arity_class: u32,
    pub matrix: Matrix,
    pub adjoint: String,
}

impl GateDef {
    pub fn new(name: impl Into<String>, arity_class: u32, matrix: Matrix, adjoint: impl Into<String>) -> Self {
        GateDef {
            name: name.into(),
            arity_class,
            matrix,
            adjoint: adjoint.into(),
        }
    }

    /// A gate that is its own adjoint.
    pub fn self_adjoint(name: impl Into<String>, arity_class: u32, matrix: Matrix) -> Self {
        let name = name.into();
        GateDef::new(name.clone(), arity_class, matrix, name)
    }

    pub fn wires(&self) -> u64 {
        u64::from(self.arity_class) + 1
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("gate `{0}` is already registered")]
    Duplicate(String),
    #[error("gate `{name}` of arity class {arity_class} needs a {expected}x{expected} matrix, got {found}x{found}")]
    Dimension {
        name: String,
        arity_class: u32,
        expected: usize,
        found: usize,
    },
    #[error("matrix of gate `{0}` is not unitary")]
    NotUnitary(String),
    #[error("gate `{name}` names adjoint `{adjoint}`, which is not registered")]
    DanglingAdjoint { name: String, adjoint: String },
    #[error("adjoint `{adjoint}` of gate `{name}` is not its conjugate transpose")]
    WrongAdjoint { name: String, adjoint: String },
    #[error("gate name `{0}` must start with an uppercase letter")]
    BadName(String),
}

#[derive(Clone, Debug, Default)]
pub struct GateRegistry {
    gates: BTreeMap<String, GateDef>,
}

impl GateRegistry {
    /// An empty registry.
    pub fn empty() -> Self {
        GateRegistry::default()
    }

    /// The built-in gate set.
    pub fn builtin() -> Self {
        let mut reg = GateRegistry::empty();
        reg.register_batch(builtin_gates())
            .expect("built-in gates are consistent");
        reg
    }

    pub fn get(&self, name: &str) -> Option<&GateDef> {
        self.gates.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.gates.contains_key(name)
    }

    pub fn arity_class(&self, name: &str) -> Option<u32> {
        self.get(name).map(|g| g.arity_class)
    }

    pub fn adjoint_of(&self, name: &str) -> Option<&str> {
        self.get(name).map(|g| g.adjoint.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.gates.keys().map(String::as_str)
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateDef> {
        self.gates.values()
    }

    pub fn register_gate(&mut self, def: GateDef) -> Result<(), RegistryError> {
        self.register_batch(vec![def])
    }

    /// Registers several gates at once, so that adjoint pairs may refer to
    /// each other. Nothing is registered if any gate is rejected.
    pub fn register_batch(&mut self, defs: Vec<GateDef>) -> Result<(), RegistryError> {
        let mut staged = self.gates.clone();
        for def in defs {
            validate_shape(&def)?;
            if staged.contains_key(&def.name) {
                return Err(RegistryError::Duplicate(def.name));
            }
            staged.insert(def.name.clone(), def);
        }
        for def in staged.values() {
            if self.gates.contains_key(&def.name) {
                continue;
            }
            let adj = staged
                .get(&def.adjoint)
                .ok_or_else(|| RegistryError::DanglingAdjoint {
                    name: def.name.clone(),
                    adjoint: def.adjoint.clone(),
                })?;
            if adj.arity_class != def.arity_class
                || !adj.matrix.approx_eq(&def.matrix.adjoint(), UNITARY_TOL)
            {
                return Err(RegistryError::WrongAdjoint {
                    name: def.name.clone(),
                    adjoint: def.adjoint.clone(),
                });
            }
        }
        self.gates = staged;
        Ok(())
    }
}

fn validate_shape(def: &GateDef) -> Result<(), RegistryError> {
    if !def.name.starts_with(|c: char| c.is_ascii_uppercase())
        || !def.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return Err(RegistryError::BadName(def.name.clone()));
    }
    let expected = 1usize
        .checked_shl(def.arity_class + 1)
        .filter(|_| def.arity_class < 16)
        .unwrap_or(usize::MAX);
    if def.matrix.dim() != expected {
        return Err(RegistryError::Dimension {
            name: def.name.clone(),
            arity_class: def.arity_class,
            expected,
            found: def.matrix.dim(),
        });
    }
    if !def.matrix.is_unitary(UNITARY_TOL) {
        return Err(RegistryError::NotUnitary(def.name.clone()));
    }
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn permutation(dim: usize, image: &[usize]) -> Matrix {
    let mut m = Matrix::zeros(dim);
    for (col, &row) in image.iter().enumerate() {
        m[(row, col)] = c(1.0, 0.0);
    }
    m
}

fn diagonal(entries: &[Complex64]) -> Matrix {
    let mut m = Matrix::zeros(entries.len());
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = e;
    }
    m
}

fn builtin_gates() -> Vec<GateDef> {
    let one = c(1.0, 0.0);
    let h = FRAC_1_SQRT_2;
    let t_phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    vec![
        GateDef::self_adjoint("I", 0, Matrix::identity(2)),
        GateDef::self_adjoint("X", 0, permutation(2, &[1, 0])),
        GateDef::self_adjoint(
            "Y",
            0,
            Matrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
                .unwrap(),
        ),
        GateDef::self_adjoint("Z", 0, diagonal(&[one, -one])),
        GateDef::self_adjoint("H", 0, Matrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()),
        GateDef::new("S", 0, diagonal(&[one, c(0.0, 1.0)]), "Sdg"),
        GateDef::new("Sdg", 0, diagonal(&[one, c(0.0, -1.0)]), "S"),
        GateDef::new("T", 0, diagonal(&[one, t_phase]), "Tdg"),
        GateDef::new("Tdg", 0, diagonal(&[one, t_phase.conj()]), "T"),
        GateDef::self_adjoint("CNOT", 1, permutation(4, &[0, 1, 3, 2])),
        GateDef::self_adjoint("CZ", 1, diagonal(&[one, one, one, -one])),
        GateDef::self_adjoint("SWAP", 1, permutation(4, &[0, 2, 1, 3])),
        GateDef::self_adjoint("CCNOT", 2, permutation(8, &[0, 1, 2, 3, 4, 5, 7, 6])),
    ]
}
