pub mod capacity;
pub mod cartan;
pub mod ccd;
pub mod error;
pub mod forms;
pub mod intertwiners;
pub mod linalg;
pub mod monotone;
pub mod orbits;

pub use error::{Error, Result};

/// Largest qubit count accepted by the dense routines.
pub const MAX_QUBITS: usize = 12;
