//! Generating tuples of matrix algebras, orbit-type strata of tuples, and a
//! rule engine for generator-rank bounds of C*-algebras.
//!
//! The numerical core works in `M_n` with dense complex matrices: the
//! algebra generated by a tuple is computed from its double commutant,
//! classified by its block structure, and compared against explicit
//! constructions of generating tuples.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constructions;
pub mod cx_homogeneous;
pub mod error;
pub mod generation;
pub mod matrix_core;
pub mod rank_calculus;
pub mod stratification;

pub use error::{Error, Result};
