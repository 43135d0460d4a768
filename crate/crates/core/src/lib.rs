//! Reconstruction of spin-s quantum states from Stern-Gerlach intensities.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod indirect;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod mixed;
pub mod optim;
pub mod particle;
pub mod pure;
pub mod selftest;
pub mod spin;

pub use error::{Error, Result};
