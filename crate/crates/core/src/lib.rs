//! Numerical toolkit for the sub-Bergman Hilbert spaces `A(b)` and `A(b̄)`.
//!
//! For an analytic symbol `b` in the closed unit ball of `H^∞` the spaces are
//! the ranges of `(I - T_b T_b̄)^{1/2}` and `(I - T_b̄ T_b)^{1/2}` acting on the
//! Bergman space `A²`, normed as range spaces. This crate realizes them as
//! finite matrix computations:
//!
//! * [`symbols`] parses and evaluates the symbol `b` (constants, polynomials,
//!   finite Blaschke products).
//! * [`moments`] integrates monomials against `1`, `|b|²` and `1 - |b|²` over
//!   the disk, exactly or by polar quadrature.
//! * [`operators`] builds Toeplitz and defect sections, PSD square roots and
//!   range-space norms.
//! * [`spaces`] implements the weighted space `A_b²`, the isometry
//!   `S_b g = P((1 - |b|²) g)` and the constructive polynomial approximation.
//! * [`verify`] runs one named numerical check per structural identity.
//! * [`cli`] is the batch front end behind the `subbergman` binary.
//!
//! Areas are normalized so that the unit disk has measure one; the Bergman norm
//! of `z^k` is `1/sqrt(k+1)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod operators;
pub mod spaces;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use symbols::{PolynomialVector, SymbolSpec};
