//! Exact piecewise-linear n-systems, their ψ-exponents, realization of
//! exponent spectra by block schedules, and a successive-minima lab.

#![allow(clippy::result_large_err)]

pub mod blocks;
pub mod discretize;
pub mod error;
pub mod exponents;
pub mod minima;
pub mod plmap;
pub mod rat;
pub mod spectrum;
pub mod systems;

pub use error::{Error, Result};
pub use plmap::PLMap;
pub use rat::{parse_rat, rat, ExtRat, Rat};
pub use systems::{GenNSystem, NSystem};
