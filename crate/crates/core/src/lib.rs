//! Weak-measurement statistics: conditional (possibly non-positive) states,
//! symmetrized joint quasi-probabilities, and finite-shot simulation of weak
//! measurement tomography.

pub mod cli;
pub mod dsl;
pub mod error;
pub mod operator;
pub mod random;
pub mod sampler;
pub mod scenarios;
pub mod tomography;

pub use error::{Error, Result};
