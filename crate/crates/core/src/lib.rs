//! Dense simulation of imaginary-time evolution driven by resource states,
//! controlled-SWAPs and post-selection, together with exact references and
//! analytic bounds.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod tensor;

pub use error::{Error, Result};
