pub mod affine;
pub mod cli;
pub mod depth_zero;
pub mod error;
pub mod hecke;
pub mod lattice;
pub mod orbital;
pub mod rootdata;
pub mod scalars;
pub mod spectral;

pub use error::{Error, Result};
