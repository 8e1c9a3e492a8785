//! The quantum co-processor: gates, circuit unitaries and total measurement.

mod gatefile;
mod matrix;
mod registry;
mod sim;

pub use gatefile::{load_gate_file, parse_complex, parse_gate_file, GateFileError};
pub use matrix::Matrix;
pub use registry::{GateDef, GateRegistry, RegistryError, UNITARY_TOL};
pub use sim::{
    apply_circuit, circuit_eval, hilb, sample_measure, MeasureDistribution, SimError,
    DEFAULT_MAX_WIRES, DENSE_WIRE_LIMIT, MATRIX_WIRE_LIMIT,
};
