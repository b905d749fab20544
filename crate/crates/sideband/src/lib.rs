//! Sideband engineering of long-range spin Hamiltonians.
//!
//! A multi-frequency Raman drive on atoms with a site-dependent energy
//! gradient turns a single photon-mediated exchange channel into an
//! arbitrary pattern of pair couplings. This crate covers the forward map
//! (drive → couplings), the inverse problem, sector-restricted spin
//! operators, Floquet effective Hamiltonians, exact and Trotterized time
//! evolution, Bloch band topology and the XXZ phase scan.

pub mod bands;
pub mod cli;
pub mod drive;
pub mod error;
pub mod evolve;
pub mod floquet;
pub mod hamiltonian;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod phases;
pub mod verify;

pub use error::{Error, Result};
