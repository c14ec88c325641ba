//! Numerical toolkit for a soliton atom laser: light-to-matter transfer of
//! a probe pulse into a quasi-1D condensate, the chirp it inherits, gray
//! soliton dynamics on a decaying background, and the perturbative
//! phase-angle law for soliton depth on that background.

pub mod config;
pub mod error;
pub mod grid;
pub mod nlse;
pub mod output;
pub mod perturbation;
pub mod runner;
pub mod threelevel;
pub mod transfer;

pub use error::{Error, Result};
