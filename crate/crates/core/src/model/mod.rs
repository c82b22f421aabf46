//! Forward model of a 1-bit RIS feeding a single receive channel.
//!
//! Element `(m, n)` sits at `(m * d_r, n * d_c)` (spacings in wavelengths) and
//! is stored at flat index `m * N + n`. A far-field source at elevation `θ`
//! and azimuth `φ` produces the phase `-2π (n d_c sinθ sinφ + m d_r cosθ)`,
//! so the row axis carries the frequency `cosθ` and the column axis carries
//! `sinθ sinφ`.

mod geometry;
mod impairments;
mod io;
mod scenario;
mod schedule;
mod synth;

pub use geometry::{
    axis_vector, direction_from_frequencies, frequencies, steering_matrix, steering_outer,
    steering_vector, RisGeometry, SourceSet,
};
pub use impairments::{sample_impairments, ImpairmentModel, ImpairmentRanges, DEFAULT_NEIGHBORS};
pub use io::{read_snapshot_csv, write_snapshot, write_snapshot_csv, SnapshotMeta};
pub use scenario::{GeometryConfig, ImpairmentConfig, ScenarioConfig, SignalConfig, SourceConfig};
pub use schedule::{build_code_schedule, CodeSchedule};
pub use synth::{synthesize_ideal, synthesize_impaired, Noise, Snapshot};

pub type C64 = num_complex::Complex64;
