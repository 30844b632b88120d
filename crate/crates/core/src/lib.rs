//! Behavioral similarity of population-based optimizers via the crossmatch
//! two-sample test.
//!
//! The pipeline runs a portfolio of optimizers on a function suite, records
//! every population, tests iteration-aligned populations of algorithm pairs
//! for equality in distribution, and clusters algorithms by the fraction of
//! iterations in which equality is not rejected.

pub mod analysis;
pub mod cluster;
pub mod crossmatch;
pub mod error;
pub mod matching;
pub mod portfolio;
pub mod trajectory;

pub use error::{Error, Result};
