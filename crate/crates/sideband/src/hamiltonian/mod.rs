//! Spin Hamiltonians restricted to excitation-number sectors.

mod fourier;
mod models;
mod operator;
mod sector;

pub use fourier::*;
pub use models::*;
pub use operator::SectorOperator;
pub use sector::*;
