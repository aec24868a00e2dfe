//! Stabilizer simulation and lattice-surgery primitives for surface-code patches.

pub mod distill;
pub mod edge_tracker;
pub mod error;
pub mod gf2;
pub mod layout;
pub mod oracle;
pub mod pauli;
pub mod protocols;
pub mod scheduler;
pub mod surgery;
pub mod tableau;

pub use error::{Error, Result};
pub use pauli::{Basis, PauliOperator, Phase};
pub use tableau::{Gate, InitBasis, Outcome, StabilizerState};
