//! Truncated Fock-space numerics for balanced homodyne detection.
//!
//! States live in the number basis of the Bargmann (holomorphic) representation.
//! Two-mode states are truncated by total photon number so that beamsplitters and
//! the photon-number-difference observable act exactly block by block.

pub mod asymptotics;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod numeric;
pub mod operators;
pub mod teleport;

pub use error::{FockError, Result};
pub use fock::{
    bargmann_eval, coherent_state, contract_mode, inner, number_state, tensor, CoherentParams,
    FockState, MultiModeState, Reduced, Truncated,
};
