//! Two-dimensional direction-of-arrival estimation with a practical 1-bit
//! reconfigurable intelligent surface and a single receive channel.
//!
//! The estimation chain is:
//!
//! 1. [`nn`]: a fully connected network maps the impaired received vector to
//!    an estimate of what ideal hardware would have produced;
//! 2. [`anm`]: a decoupled atomic-norm program denoises it, yielding two small
//!    Hermitian Toeplitz matrices and an `M x N` signal matrix;
//! 3. [`doa`]: linear-prediction rooting of the Toeplitz matrices gives the
//!    row/column spatial frequencies, which are paired and mapped to angles.
//!
//! [`model`] simulates the hardware, [`baselines`] holds the grid
//! beamformer, OMP, a numerical CRB and the RMSE metric, and [`harness`]
//! runs seeded Monte-Carlo experiments.

pub mod anm;
pub mod baselines;
pub mod doa;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
pub use model::{RisGeometry, Snapshot, SourceSet, C64};
