//! Series approximations of eigenvalue and eigenvector paths `lambda(mu)`,
//! `v(mu)` of a parametric matrix `A(mu)`.
//!
//! Two expansions are provided:
//!
//! * [`taylor`]: Taylor coefficients about a point `mu0`, computed order by
//!   order from one bordered linear system whose matrix never changes.
//! * [`chebyshev`]: second-kind Chebyshev coefficients on an interval, seeded
//!   by a triangular forward substitution and refined with Newton's method on
//!   the full coupled system.
//!
//! [`analysis`] evaluates the resulting series, compares them with direct
//! eigensolves, and uses them as surrogates for Monte-Carlo sampling.

// `!(x > 0.0)` is used on purpose: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chebyshev;
pub mod eigenpair;
pub mod error;
pub mod linalg;
pub mod problems;
pub mod series;
pub mod taylor;

pub use eigenpair::{Diagnostics, EigenPairSeries};
pub use error::{Error, Result};
pub use linalg::{eigen_all, Conjugation, EigenDecomposition, Precision};
pub use problems::ParametricProblem;
pub use series::{Basis, CMatrix, CVector, MaxAbs, MatrixSeries, ScalarSeries, Series, VectorSeries, C64};
