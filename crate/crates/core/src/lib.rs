//! Simulation toolkit for protecting qubits against spontaneous emission by
//! combining collective bang-bang pulses with a detected-jump error-correcting
//! code, plus the encoded-gate constructions that stay inside the code.
//!
//! Qubits are numbered from 1; qubit 1 is the most significant bit of a
//! computational-basis index.

pub mod circuit;
pub mod decoupling;
pub mod encoded_gates;
pub mod error;
pub mod jump_code;
pub mod quantum;
pub mod trajectory;

pub use error::{Error, Result};
pub use num_complex::Complex64;
