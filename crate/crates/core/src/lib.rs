//! Finite-difference realization and verification of universal eigenvalue
//! inequalities for the Dirichlet polyharmonic operator `(-Δ)^l`.
//!
//! * [`algebra`]: sum inequalities and the power-family membership test;
//! * [`domain`], [`operators`]: grids, stencils and the discrete operators;
//! * [`eigensolve`]: smallest eigenpairs with certified residuals;
//! * [`bounds`]: both sides of every eigenvalue inequality, plus a priori upper bounds;
//! * [`oracle`]: closed-form reference spectra;
//! * [`harness`]: end-to-end runs, reports and the CLI plumbing.

pub mod algebra;
pub mod banded;
pub mod bounds;
pub mod domain;
pub mod eigensolve;
pub mod harness;
pub mod operators;
pub mod oracle;

pub use algebra::{ExponentPair, MonotoneTriple, Tolerance};
pub use domain::{DomainSpec, Grid, GridFunction, Shape};
pub use eigensolve::{smallest_eigenpairs, SolverOptions, Spectrum};
pub use operators::DiscreteOperator;
