//! Grid beamforming and OMP baselines, the numerical CRB, and RMSE.

pub mod crb;
pub mod grid;
pub mod metrics;
pub mod omp;

pub use crb::{crb_numeric, mean_jacobian, steering_derivatives};
pub use grid::{grid_spectrum, AngleGrid, Dictionary, Peak, Spectrum};
pub use metrics::{matched_squared_error, rmse, TrialResult};
pub use omp::{omp_estimate, OmpResult};
