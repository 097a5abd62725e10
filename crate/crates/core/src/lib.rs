//! Classical simulation of a quantum SAT pipeline.
//!
//! A CNF instance is compiled into a reversible circuit over `n` variable
//! qubits, `mu` work ("dust") qubits and one result qubit. The circuit is run
//! on a state vector after a Hadamard block, which leaves the result qubit
//! holding the truth value of every assignment in superposition. The weight
//! `q^2 = r / 2^n` on the result qubit is then handed to one of two
//! discriminators:
//!
//! - [`amplifier`]: iterates the logistic map on `q^2` and declares SAT when
//!   the trajectory crosses `1/2` within `2n` steps;
//! - [`lindblad`]: drives a two-level system whose dynamics damp when
//!   `q != 0` and oscillate periodically when `q == 0`.
//!
//! The [`entropy`] module holds the finite-dimensional mutual-entropy toolkit
//! (von Neumann, Umegaki relative entropy, `I1`, Holevo, entropy exchange,
//! coherent informations).

pub mod amplifier;
pub mod cnf;
pub mod compiler;
pub mod entropy;
pub mod gates;
pub mod json;
pub mod lindblad;
pub mod pipeline;
pub mod simulator;

pub use cnf::{Assignment, Clause, CnfInstance, Literal};
pub use compiler::{compile, compute_layout, CompiledCircuit, QubitLayout};
pub use gates::{GateKind, GateOp, GateSequence};
pub use simulator::StateVector;
