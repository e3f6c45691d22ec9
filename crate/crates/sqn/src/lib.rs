//! Stochastic quasi-Newton optimization.
//!
//! This crate implements a family of stochastic quasi-Newton methods for
//! unconstrained, possibly nonconvex problems where only noisy gradients are
//! available through a stochastic first-order oracle. The iterate update is
//!
//! ```text
//! x_{k+1} = x_k - alpha_k * (B_k^{-1} + zeta_k I) * G_k
//! ```
//!
//! where `G_k` is a mini-batch gradient estimate and `B_k` is a positive
//! definite curvature approximation. Two curvature strategies that stay
//! positive definite without line searches are provided — a damped BFGS
//! update with a spectral shift, and a cyclic Barzilai-Borwein scalar — next
//! to a shifted-BFGS baseline and the plain SGD degenerate case.
//!
//! Drivers come in two flavors: [`solvers::run_sqn`] iterates until a
//! termination rule or an iteration cap fires, and [`solvers::run_rsqn`]
//! runs a randomly drawn number of iterations and returns that iterate,
//! which is the form the worst-case complexity analysis applies to.
//!
//! The [`oracle`] module ships two synthetic benchmark problems (a randomly
//! perturbed diagonal quadratic and a sparse sigmoid-loss SVM) plus the
//! evaluation utilities used by the benchmark harness.

pub mod error;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod solvers;
pub mod updaters;

pub use error::Error;
pub use linalg::{apply_inverse_plus_shift, min_eigenvalue, spd_solve, CurvatureApprox, SpdMatrix, Vector};
pub use rng::SeededRng;
