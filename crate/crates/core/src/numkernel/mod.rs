//! Self-contained dense numeric kernel.
//!
//! Everything the estimators need and nothing more: row-major real and complex
//! matrices, reproducible complex Gaussian sampling, a matrix-free power
//! method for the Gram operator `B B*`, Hermitian Cholesky log-determinants,
//! Gauss–Chebyshev quadrature under the semicircle weight, a small pivoted
//! dense solver and a Jacobi eigenvalue oracle for tests.

mod cholesky;
mod eig;
mod matrix;
mod power;
mod quadrature;
mod rng;
mod solve;

pub use cholesky::{gram_plus_identity, hermitian_cholesky, logdet_i_plus_gram};
pub use eig::{eig_hermitian_small, eig_symmetric};
pub use matrix::{ComplexMatrix, Matrix, RealMatrix};
pub use power::{power_method_max_eig, DEFAULT_POWER_ITERS};
pub use quadrature::{chebyshev_weighted_integral, ChebyshevRule, DEFAULT_QUAD_NODES};
pub use rng::{sample_complex_gaussian, RngStream};
pub use solve::{condition_inf, solve_dense, DenseSolution};

pub use num_complex::Complex64;
