//! Coherence creation from thermal states under unitary dynamics.

pub mod cli;
pub mod coherence;
pub mod constrained;
pub mod correlation;
pub mod error;
pub mod search;
pub mod state;
pub mod thermal;

pub use error::{Error, Result};
