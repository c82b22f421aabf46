//! Atomic-norm programs: projections, the splitting solver, and Vandermonde
//! decomposition.

pub mod projections;
pub mod solver;
pub mod vandermonde;

pub use projections::{project_block_toeplitz, project_psd, project_toeplitz_hermitian, toeplitz_from_lags};
pub use solver::{
    alpha_for_noise, atomic_norm, decoupled_atomic_norm, solve_danm, solve_danm_with, solve_full_anm, DecoupledSdpVars,
    Diagnostics, FullAnmInput, FullSdpVars, Measurement, Mode, Solution, SolverConfig,
};
pub use vandermonde::{vandermonde_decompose, AtomicDecomposition};

pub(crate) use solver::row_major_vec;
