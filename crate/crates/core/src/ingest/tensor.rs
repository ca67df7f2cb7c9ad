//! Fixed-size nodule tensors: the CNN input representation.

use super::{augment::AugmentationTag, IngestError, Volume};

/// How a volume is embedded into a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorMode {
    /// ROI bounding box centered in the tensor; voxels with mask 0 are
    /// exactly zero everywhere.
    Segmented,
    /// A window of the requested shape centered on the ROI centroid;
    /// non-ROI intensities inside the window are preserved.
    Patch,
}

/// A fixed-size zero-padded 3D tensor holding one (possibly augmented)
/// nodule.
#[derive(Debug, Clone, PartialEq)]
pub struct NoduleTensor {
    pub shape: (usize, usize, usize),
    pub values: Vec<f32>,
    /// 0 = benign, 1 = malignant.
    pub label: u8,
    pub nodule_id: String,
    pub tag: AugmentationTag,
}

impl NoduleTensor {
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.shape.0 * (y + self.shape.1 * z)
    }

    pub fn len(&self) -> usize {
        self.shape.0 * self.shape.1 * self.shape.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds a nodule tensor from a volume.
///
/// Segmented mode requires the ROI bounding box to fit in `shape` and
/// centers it with per-axis offset `floor((T - S) / 2)`. Patch mode
/// crops/pads a window of `shape` around the ROI centroid without zeroing
/// non-ROI voxels.
pub fn build_tensor(
    v: &Volume,
    shape: (usize, usize, usize),
    mode: TensorMode,
    nodule_id: &str,
    label: u8,
    tag: AugmentationTag,
) -> Result<NoduleTensor, IngestError> {
    let len = shape.0 * shape.1 * shape.2;
    let mut values = vec![0.0f32; len];
    match mode {
        TensorMode::Segmented => {
            let ((x0, y0, z0), (x1, y1, z1)) = v.roi_bbox();
            let ext = (x1 - x0 + 1, y1 - y0 + 1, z1 - z0 + 1);
            for (axis, (e, t)) in [('x', (ext.0, shape.0)), ('y', (ext.1, shape.1)), ('z', (ext.2, shape.2))] {
                if e > t {
                    return Err(IngestError::RoiTooLarge {
                        axis,
                        roi: e,
                        shape: t,
                    });
                }
            }
            let off = (
                (shape.0 - ext.0) / 2,
                (shape.1 - ext.1) / 2,
                (shape.2 - ext.2) / 2,
            );
            for z in z0..=z1 {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        if v.masked(x, y, z) {
                            let ti = (x - x0 + off.0)
                                + shape.0 * ((y - y0 + off.1) + shape.1 * (z - z0 + off.2));
                            values[ti] = v.voxel(x, y, z) as f32;
                        }
                    }
                }
            }
        }
        TensorMode::Patch => {
            let (cx, cy, cz) = v.roi_centroid();
            let start = (
                cx.round() as i64 - (shape.0 / 2) as i64,
                cy.round() as i64 - (shape.1 / 2) as i64,
                cz.round() as i64 - (shape.2 / 2) as i64,
            );
            let (nx, ny, nz) = v.dims();
            for tz in 0..shape.2 {
                let sz = start.2 + tz as i64;
                if sz < 0 || sz >= nz as i64 {
                    continue;
                }
                for ty in 0..shape.1 {
                    let sy = start.1 + ty as i64;
                    if sy < 0 || sy >= ny as i64 {
                        continue;
                    }
                    for tx in 0..shape.0 {
                        let sx = start.0 + tx as i64;
                        if sx < 0 || sx >= nx as i64 {
                            continue;
                        }
                        values[tx + shape.0 * (ty + shape.1 * tz)] =
                            v.voxel(sx as usize, sy as usize, sz as usize) as f32;
                    }
                }
            }
        }
    }
    Ok(NoduleTensor {
        shape,
        values,
        label,
        nodule_id: nodule_id.to_string(),
        tag,
    })
}

/// Smallest tensor shape covering the ROI bounding boxes of every volume
/// under all 13 augmentations: the per-axis max of transformed extents.
pub fn dataset_shape(volumes: &[Volume]) -> Result<(usize, usize, usize), IngestError> {
    if volumes.is_empty() {
        return Err(IngestError::EmptyDataset);
    }
    let mut shape = (0usize, 0usize, 0usize);
    for v in volumes {
        let ext = v.roi_extent();
        for tag in AugmentationTag::all() {
            let e = tag.apply_dims(ext);
            shape.0 = shape.0.max(e.0);
            shape.1 = shape.1.max(e.1);
            shape.2 = shape.2.max(e.2);
        }
    }
    Ok(shape)
}
