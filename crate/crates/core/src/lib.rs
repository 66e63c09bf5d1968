//! Exact traces of cycle integrals of meromorphic Hilbert modular forms, with a
//! numeric layer that cross-checks the analytic ingredients.

pub mod analytic;
pub mod cmat;
pub mod cusp;
pub mod error;
pub mod fqm;
pub mod intmat;
pub mod lattice;
pub mod qseries;
pub mod numeric;
pub mod rat;
pub mod theta;
pub mod trace;
pub mod verify;
pub mod wforms;

pub use error::{HzError, Result};
