//! Volume ingestion: loading, isotropic resampling, nodule tensor
//! construction and augmentation.
//!
//! Axis convention used throughout the crate: arrays are stored x-fastest
//! (index = `x + nx*(y + ny*z)`) and every direction triple is a
//! `(dx, dy, dz)` voxel-index offset.

mod augment;
mod io;
mod resample;
mod tensor;
mod volume;

pub use augment::{
    augment, augment_volume, transform_grid, AugmentationTag, Axis, Plane, RotationAngle,
};
pub use io::{read_labels, read_volume, validate_id, write_volume, VolumeHeader};
pub use resample::resample;
pub use tensor::{build_tensor, dataset_shape, NoduleTensor, TensorMode};
pub use volume::Volume;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("voxel buffer has {got} elements, dims {dims:?} require {want}")]
    VoxelLenMismatch {
        dims: (usize, usize, usize),
        got: usize,
        want: usize,
    },
    #[error("mask buffer has {got} elements, dims {dims:?} require {want}")]
    MaskLenMismatch {
        dims: (usize, usize, usize),
        got: usize,
        want: usize,
    },
    #[error("spacing components must be positive and finite, got {0:?}")]
    BadSpacing((f64, f64, f64)),
    #[error("mask value {value} at flat index {index} is not 0 or 1")]
    NonBinaryMask { index: usize, value: u8 },
    #[error("mask contains no voxels")]
    EmptyMask,
    #[error("non-finite voxel at flat index {0}")]
    NonFiniteVoxel(usize),
    #[error("target spacing must be positive and finite, got {0}")]
    BadTargetSpacing(f64),
    #[error("degenerate dims along {axis} axis: {len} voxels (need at least 2)")]
    DegenerateAxis { axis: char, len: usize },
    #[error("resampled mask is empty (target spacing {0} mm too coarse for this ROI)")]
    ResampledMaskEmpty(f64),
    #[error("ROI extent {roi} exceeds tensor shape {shape} along {axis} axis")]
    RoiTooLarge { axis: char, roi: usize, shape: usize },
    #[error("dataset_shape requires a nonempty volume list")]
    EmptyDataset,
    #[error("volume id {0:?} contains characters outside [A-Za-z0-9_.-]")]
    BadId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: malformed header: {reason}")]
    BadHeader { path: String, reason: String },
}

pub(crate) fn io_err(path: &std::path::Path, source: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.display().to_string(),
        source,
    }
}
