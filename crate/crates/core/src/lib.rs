#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Numerical laboratory for correlated random matrices with i.i.d. entry pairs, the
//! elliptic law, Hermitization and anti-concentration estimates.

pub mod anticonc;
pub mod atoms;
pub mod elliptic;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod limitlaw;
pub mod linalg;
pub mod lsvlab;
pub mod matrix;
pub mod quad;
pub mod rng;
pub mod spectra;
pub mod stats;

pub use error::{LabError, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
