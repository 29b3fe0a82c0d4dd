//! Numerical laboratory for uniformly convex geodesic metric spaces.
//!
//! The crate provides concrete model spaces (Euclidean, ℓp, Euclidean cones),
//! randomized checkers for the convexity inequalities these spaces satisfy,
//! exact small-instance Wasserstein transport, barycenter and circumcenter
//! solvers, and sequence diagnostics (asymptotic centers, weak sequential
//! convergence, co-convex limit probes) including a numeric reproduction of
//! the cone-over-Hilbert two-limit-point construction.
//!
//! All randomized routines take an explicit seed and produce identical
//! results for a fixed seed regardless of thread count.

pub mod barycenters;
pub mod convexity;
pub mod error;
pub mod means;
pub mod optim;
pub mod rng;
pub mod sequences;
pub mod sets;
pub mod spaces;
pub mod transport;

pub use error::{Error, Result};
pub use means::{l_mean, orlicz_mean, p_mean, Exponent, OrliczFunction};
pub use spaces::{Point, Space};
