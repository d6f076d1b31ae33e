//! Uplink capacity estimation for clustered ultra-dense wireless networks.
//!
//! The crate builds planar network scenarios, partitions them into cooperating
//! clusters, derives the interference-whitened channel profile of a cluster and
//! estimates its per-BS capacity two ways:
//!
//! * [`mpm`]: the moment passing method. Closed-form spectral moments of the
//!   SINR matrix select a polynomial correction to the Marčenko–Pastur density,
//!   and capacity becomes a one-dimensional weighted integral of `log(1 + x)`.
//!   Cost is `O(J_m K_m)` per trial.
//! * [`baseline`]: exact Monte-Carlo evaluation of `log det(I + B B*)` through a
//!   Hermitian Cholesky factorization. Cost is `O(J_m^2 K_m + J_m^3)` per trial.
//!
//! [`harness`] drives experiments, timing sweeps and reports, and backs the
//! `rmtcap` binary.
// NaN-rejecting `!(x > 0.0)` guards and index loops over matrix rows are
// intentional throughout the numeric code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod channel;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod mpm;
pub mod numkernel;
pub mod par;
pub mod scenario;

pub use error::{Error, Result};
