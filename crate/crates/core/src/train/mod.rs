//! Meta-training: objectives, Adam and the curriculum loop.

mod adam;
mod config;
mod curriculum;
pub mod loss;

pub use adam::{adam_update, Adam};
pub use config::{default_schedule, TrainConfig};
pub use curriculum::{curriculum_train, training_batch, TrainEvent, TrainMetrics, Trainer};
pub use loss::{composite_loss, mc_improvement, trajectory_cost, LossForm, LossSpec};
