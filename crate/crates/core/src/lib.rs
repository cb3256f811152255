//! Exact and high-SNR asymptotic outage probability of Rayleigh MIMO
//! channels under Kronecker spatial correlation.

pub mod analysis;
pub mod asymptotic;
pub mod cli;
pub mod dd;
pub mod error;
pub mod exact;
pub mod mellin;
pub mod model;
pub mod monte_carlo;
pub mod permutations;
pub mod quadrature;
pub mod residue;
pub mod special;
pub mod verify;

pub use error::{OutageError, Result};
