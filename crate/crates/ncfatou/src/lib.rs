//! Numerics for noncommutative (free) function theory on a truncated full Fock space.
//!
//! The crate converts between contractive NC power series, NC Herglotz series and NC
//! measures (moment functionals), estimates the Lebesgue decomposition `μ = μ_ac + μ_s`
//! of an NC measure through regularized resolvents of radial operators, and factors
//! positive L-Toeplitz operators. The `oracle1d` module provides independent classical
//! one-variable reference values.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod factor;
pub mod fock;
pub mod lebesgue;
pub mod linalg;
pub mod measure;
pub mod oracle1d;
pub mod series;
pub mod words;

pub use error::{Error, Result};
pub use fock::{FockVector, TruncatedOperator};
pub use measure::{GramMatrix, MomentFunctional};
pub use num_complex::Complex64 as C64;
pub use series::{MatrixPoint, NCSeries};
pub use words::{Word, WordBasis};
