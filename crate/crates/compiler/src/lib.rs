pub mod circuit;
mod kernel;
mod optimize;
pub mod passes;
pub mod qasm;
pub mod routing;
pub mod synth;

pub use circuit::{Circuit, CircuitDag, CircuitError, DurationModel, Gate, GateKind, Metrics};
pub use qasm::{emit_qasm, parse_qasm, QasmError};
