//! Deterministic machinery for mesoscopic linear eigenvalue statistics of
//! Wigner-type random matrices, together with a Monte Carlo harness that
//! checks the central limit theorem empirically.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! profile  ->  dyson  ->  stability / singularity  ->  kernels
//!                 \                                      |
//!                  \-> finiten (finite-N variance)       |
//!                   \-> montecarlo (sampling + CLT test) <-
//! ```
//!
//! * [`profile`] — variance profiles `S`, entry distributions, and the
//!   built-in compactly supported test functions.
//! * [`dyson`] — vector Dyson equation solver, Stieltjes inversion, density
//!   grids and support location.
//! * [`stability`] — the two-parameter stability operator `B(z,zeta) =
//!   1 - m(z)m(zeta)S`, its isolated eigenvalue, Perron data of the
//!   saturated self-energy operator, and the expansion function `xi`.
//! * [`singularity`] — classification of edges, cusps and small local
//!   minima; the local quantities `sigma`, `psi`, `Delta_hat`, the
//!   fluctuation scale and the regime parameter `alpha_hat`.
//! * [`kernels`] — universal kernels and shape functions, the
//!   alpha-parameterized variance/bias functionals, and the homogeneous
//!   H^{1/2} seminorm with singularity-aware quadrature.
//! * [`finiten`] — the finite-N deterministic variance `V(f)` via the
//!   quasi-analytic-extension double contour integral.
//! * [`montecarlo`] — Wigner-type sampling, linear statistics, and the
//!   CLT experiment harness.
//! * [`verify`] — the acceptance suite run by `cuspstats verify` and by the
//!   `acceptance` integration test.
//!
//! Everything upstream of `montecarlo` works in the block-reduced
//! representation: for block-constant variance profiles with `K` blocks the
//! Dyson equation and all operator computations collapse to `K` dimensions,
//! which keeps the eta -> 0 continuation and the 4D variance quadrature cheap.

pub mod cli;
pub mod dyson;
pub mod finiten;
pub mod kernels;
pub mod montecarlo;
pub mod profile;
pub mod singularity;
pub mod stability;
pub mod tuning;
pub mod verify;

pub(crate) mod lapack;
pub mod quad;
pub(crate) mod smallmat;

mod error;
pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) type C64 = num_complex::Complex64;
