//! Extremal moment bounds for Gaussian random matrices with a variance profile.
//!
//! The crate computes exact Gaussian moments (`wick`), the coefficient tables
//! of the combinatorial upper bound that is extremal at the iid model
//! (`extremum`), exact Wishart moment recursions (`wishart`), closed-form tail
//! and MGF bounds (`tails`) and a seeded Monte Carlo harness (`montecarlo`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod extremum;
pub mod montecarlo;
pub mod pairing;
pub mod profile;
pub mod rational;
pub mod tails;
pub mod verify;
pub mod wick;
pub mod wishart;

pub use error::{Error, Result};
