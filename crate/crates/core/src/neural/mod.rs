//! Neural scattering fields and their training.
//!
//! A network maps an encoded canonical-frame position to a density and, with
//! the encoded light and view directions appended, to a scatter fraction.
//! Training fits a coarse/fine pair of such networks to images of one object
//! lit by one point light, by gradient descent through the compositing sum.

mod adam;
mod checkpoint;
mod data;
mod encoding;
mod field;
pub mod gradcheck;
mod mlp;
mod resample;
mod scalar;
mod train;

pub use adam::{Adam, AdamParams};
pub use checkpoint::{Checkpoint, OptimizerState};
pub use data::{frame_samples, load_split, render_frame};
pub use encoding::PositionalEncoding;
pub use field::MlpField;
pub use mlp::{scaled_sigmoid, scaled_sigmoid_raw, sigmoid, softplus, Cache, Inputs, Layer, Mlp, MlpConfig, Outputs};
pub use resample::{hierarchical_resample, merge_sorted};
pub use scalar::Scalar;
pub use train::{
    activation_patterns, loss_curve_csv, mlp_backward, render_rays, train, Gradients, LossRecord, PassOptions, TrainConfig, TrainSample,
    Trainer,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("invalid network or training configuration: {0}")]
    Config(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("training diverged at iteration {iteration}: {msg}")]
    Divergence { iteration: u64, msg: String },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("{0}")]
    Io(String),
}
