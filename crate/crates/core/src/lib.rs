//! Pseudo-spectral Navier–Stokes coupled to pressureless Euler by drag, with
//! a 1D1V kinetic model for the cold limit.

pub mod error;
pub mod grid;
pub mod spectral;
pub mod euler;
pub mod ns;
pub mod coupler;
pub mod diagnostics;
pub mod heat;
pub mod kinetic;
pub mod config;
pub mod io;
pub mod init;
pub mod run;
pub mod presets;
pub mod verify;

pub use error::{PensError, Result};
