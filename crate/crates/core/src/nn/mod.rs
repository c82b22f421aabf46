//! Fully connected reconstruction network mapping impaired snapshots to
//! their ideal counterparts.

pub mod adam;
pub mod data;
pub mod io;
pub mod mlp;
pub mod train;

pub use adam::AdamState;
pub use data::{generate_dataset, generate_dataset_from, stack, to_matrices, unstack, TrainingExample};
pub use io::{load_model, read_model, save_model, write_model, ModelMeta};
pub use mlp::{backward, backward_batch, batch_loss, forward, forward_batch, loss, relu, Layer, MlpParams, LAYERS};
pub use train::{dataset_scale, resume, train, write_loss_csv, Reconstructor, TrainConfig, TrainOutcome};
