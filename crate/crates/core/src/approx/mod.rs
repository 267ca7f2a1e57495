//! Small dense networks with exact reverse-mode gradients, the Adam optimizer
//! and soft-updated target copies.

mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod matrix;
mod mlp;
mod target;

pub use adam::OptimState;
pub use checkpoint::{read_mlp, write_mlp};
pub use matrix::Matrix;
pub use mlp::{parameter_count, ForwardCache, Mlp, OutputActivation};
pub use target::TargetNet;
