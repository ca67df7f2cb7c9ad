//! A from-scratch 3D CNN engine: forward and backward passes for 3D
//! convolution, max-pooling, multi-crop pooling, dense layers, layer
//! normalization with ReLU and inverted dropout; Adam training on balanced
//! batches; and feature extraction at the output layer and the final
//! hidden fully connected layer.

mod adam;
mod arch;
mod io;
mod layers;
mod loss;
mod network;
mod train;

pub use adam::{Adam, AdamParams};
pub use arch::{preset, ArchitectureSpec, LayerSpec, Padding, TensorShape, PRESET_NAMES};
pub use io::{load_network, read_log_csv, save_network, write_log_csv};
pub use layers::SpatialShape;
pub use loss::{batch_loss, batch_loss_grad, softmax};
pub use network::{Network, OutputFeatures, Scalar};
pub use train::{train, EpochStat, LrStage, TrainConfig, TrainedNetwork};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("layer {index} ({kind}): {reason}")]
    BadLayer {
        index: usize,
        kind: String,
        reason: String,
    },
    #[error("architecture must end with exactly one Output layer")]
    MissingOutput,
    #[error("unknown preset {0:?}; valid presets: {1}")]
    UnknownPreset(String, String),
    #[error("architecture has no hidden dense layer to read FFL features from")]
    NoHiddenDense,
    #[error("input has {got} values, architecture expects {want}")]
    InputLenMismatch { got: usize, want: usize },
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("tensor {id} has shape {got:?}, expected {want:?}")]
    TensorShapeMismatch {
        id: String,
        got: (usize, usize, usize),
        want: (usize, usize, usize),
    },
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("training diverged at epoch {epoch}; last finite checkpoint retained")]
    Diverged {
        epoch: u32,
        checkpoint: Box<TrainedNetwork>,
    },
    #[error("parameter blob has {got} values, architecture expects {want}")]
    ParamLenMismatch { got: usize, want: usize },
    #[error("{path}: {reason}")]
    BadModelFile { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
