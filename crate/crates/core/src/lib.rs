//! Schrieffer-Wolff effective Hamiltonians built from eigenoperator
//! decompositions of finite composite quantum systems.

pub mod cli;
pub mod eigenop;
pub mod dispersive;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
