//! Approximate sampling and counting of fixed-size independent sets in
//! bounded-degree graphs.
//!
//! The pipeline runs hard-core Glauber dynamics ([`glauber`]) inside a binary
//! search over a fugacity grid ([`sample_k`]) to draw near-uniform independent
//! sets of a given size, then anneals over sizes ([`annealing`]) to estimate
//! `i_k(G)`. Every randomized path is checked against exact brute force
//! ([`oracle`]). [`reduction`] builds the gadget instances that tie `i_k` to
//! the hard-core partition function, and [`ising`] carries the same machinery
//! over to the anti-ferromagnetic Ising model at fixed magnetization.

pub mod annealing;
pub mod error;
pub mod glauber;
pub mod graph;
pub mod ising;
pub mod oracle;
pub mod reduction;
pub mod rng;
pub mod sample_k;
pub mod samplers;
pub mod thresholds;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
pub use oracle::IndependencePolynomial;

/// `floor(x)` that absorbs float noise such as `0.3 * 10 = 3.0000000000000004`.
pub(crate) fn floor_tol(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

/// `ceil(x)` with the same tolerance as [`floor_tol`].
pub(crate) fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}
