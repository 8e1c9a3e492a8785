//! qPCF: a PCF with quantum circuits as data.
//!
//! Programs are parsed ([`parser`]), checked against a dependent type
//! system whose indexes are arithmetic terms ([`typecheck`], [`index`]),
//! and evaluated by a call-by-name machine that measures circuits on a
//! state-vector simulator ([`eval`], [`qsim`]). [`Session`] bundles these
//! with the [`prelude`] for everyday use.
//!
//! ```
//! let s = qpcf::Session::new();
//! let d = s.dist("dmeas(0, epr)").unwrap();
//! assert!((d.mass(&qpcf::Value::num(0)) - 0.5).abs() < 1e-12);
//! ```

pub mod ast;
pub mod circuit;
pub mod cli;
pub mod eval;
pub mod index;
pub mod parser;
pub mod prelude;
pub mod qasm;
pub mod qsim;
pub mod session;
pub mod typecheck;

pub use circuit::CircuitValue;
pub use eval::{Distribution, EvalConfig, EvalOutcome, Value};
pub use session::{Error, Session};
