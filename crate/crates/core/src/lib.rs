//! Discrete probability distributions on the circular lattice
//! `{2πr/m : r = 0, …, m−1}`.
//!
//! Families are built from continuous circular laws by four routes:
//! maximum entropy, centered wrapping of integer laws, marginalization
//! (integrating the parent density over lattice arcs) and conditionalization
//! (evaluating the parent density at lattice points and renormalizing).
//! On top of the probability functions the crate provides trigonometric
//! moments, maximum-likelihood fitting, uniformity and serial-dependence
//! tests, Bayesian changepoint and mixture samplers, divergence diagnostics
//! and a bivariate construction on the discrete torus.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod distributions;
pub mod divergence;
pub mod error;
pub mod inference;
pub mod lattice;
pub mod moments;
pub mod sampling;
pub mod special;
pub mod torus;

pub use distributions::{Family, FamilySpec, IrregularPmf};
pub use error::{Error, Result};
pub use lattice::{Lattice, Pmf};
pub use sampling::RngSeed;
