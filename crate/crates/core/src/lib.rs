//! Identification of the informative core of a network whose periphery
//! connects in an uninformative (ER-type or configuration-type) pattern.
//!
//! The pipeline is: truncated eigendecomposition of the adjacency matrix,
//! per-node centered row norms of the low-rank estimate (optionally with a
//! degree correction), then a top-k, threshold or 2-means cut of the scores.

pub mod baselines;
pub mod cli;
pub mod coreid;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod linop;
pub mod rng;
pub mod spectral;
pub mod synth;

pub use error::{CorexError, Result};
