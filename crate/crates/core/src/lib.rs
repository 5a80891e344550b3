//! Exact computations with truncated loop groups, Witt vectors and zip groups for GL_n
//! over small finite fields.

pub mod coset;
pub mod error;
pub mod gf;
pub mod grpdata;
pub mod matring;
pub mod orbits;
pub mod report;
pub mod series;
pub mod suites;
pub mod weyl;
pub mod witt;

pub use error::{Error, Result};
