//! Compressed-sensing analysis of sparse MIMO channels in the angular domain.
//!
//! The crate models a uniform-linear-array channel, its angular (DFT-basis)
//! representation, and the Kronecker-structured sensing matrix that arises from
//! separate transmit and receive beamforming. On top of that it provides exact
//! (exhaustive) spark and restricted-isometry oracles, BCH parity-check sensing
//! designs, closed-form measurement bounds, and small-scale sparse recovery.

pub mod array_channel;
pub mod bounds;
pub mod code_matrices;
pub mod cs_analysis;
pub mod enumeration;
pub mod error;
pub mod json;
pub mod linalg;
pub mod recovery;
pub mod sensing;

pub use enumeration::Budget;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, RMatrix};
