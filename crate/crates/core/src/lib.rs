//! Simulation toolkit for cavity-enhanced sum-frequency up-conversion of
//! orbital-angular-momentum (OAM) single photons.
//!
//! The crate covers Laguerre–Gauss beams, the focusing overlap factor h(l, ξ),
//! conversion efficiency and cavity design, OAM–polarization state algebra,
//! synthetic ICCD imaging and photon-counting statistics.

pub mod beams;
pub mod cli;
pub mod config;
pub mod constants;
pub mod conversion;
pub mod error;
pub mod imaging;
pub mod overlap;
pub mod quadrature;
pub mod rng;
pub mod states;
pub mod statistics;

pub use error::{Error, Result};
