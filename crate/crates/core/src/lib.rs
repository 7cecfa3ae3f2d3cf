//! Simulation of a photon-number ("Fock") filter: a ring cavity coupled to a
//! signal mode through a cross-Kerr medium, read out by an ON/OFF detector.
//!
//! * [`fock`]: truncated Fock-space states, displacement, metrics.
//! * [`cavity`]: transfer amplitudes and the resonance profile.
//! * [`filter`]: one filter pass, exact and in the good-cavity limit.
//! * [`cascade`]: chains of filters and Monte Carlo photon counting.
//! * [`tomography`]: density matrices from displaced photon statistics.
//!
//! Data-parallel loops take an [`Exec`] argument; build without the default
//! `parallel` feature for a purely sequential library.

pub mod cascade;
pub mod cavity;
mod error;
pub mod exec;
pub mod filter;
pub mod fock;
pub mod table;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Exec;
