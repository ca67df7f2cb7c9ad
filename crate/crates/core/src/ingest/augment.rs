//! The 13-variant augmentation set: identity, in-plane rotations of 90/180/270
//! degrees about each axis, and flips across the three coordinate planes.
//! All transforms are exact index permutations; no interpolation.

use serde::{Deserialize, Serialize};

use super::{NoduleTensor, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RotationAngle {
    Deg90,
    Deg180,
    Deg270,
}

impl RotationAngle {
    fn quarter_turns(self) -> usize {
        match self {
            RotationAngle::Deg90 => 1,
            RotationAngle::Deg180 => 2,
            RotationAngle::Deg270 => 3,
        }
    }
}

/// Coordinate plane for flips; flipping across a plane reverses the
/// remaining axis (xy reverses z, yz reverses x, xz reverses y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    Xy,
    Yz,
    Xz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AugmentationTag {
    Identity,
    Rotation { axis: Axis, angle: RotationAngle },
    Flip { plane: Plane },
}

impl AugmentationTag {
    /// All 13 tags: 1 identity + 9 rotations + 3 flips.
    pub fn all() -> [AugmentationTag; 13] {
        use AugmentationTag::*;
        [
            Identity,
            Rotation { axis: Axis::X, angle: RotationAngle::Deg90 },
            Rotation { axis: Axis::X, angle: RotationAngle::Deg180 },
            Rotation { axis: Axis::X, angle: RotationAngle::Deg270 },
            Rotation { axis: Axis::Y, angle: RotationAngle::Deg90 },
            Rotation { axis: Axis::Y, angle: RotationAngle::Deg180 },
            Rotation { axis: Axis::Y, angle: RotationAngle::Deg270 },
            Rotation { axis: Axis::Z, angle: RotationAngle::Deg90 },
            Rotation { axis: Axis::Z, angle: RotationAngle::Deg180 },
            Rotation { axis: Axis::Z, angle: RotationAngle::Deg270 },
            Flip { plane: Plane::Xy },
            Flip { plane: Plane::Yz },
            Flip { plane: Plane::Xz },
        ]
    }

    /// Short stable name used in provenance strings and file names.
    pub fn name(&self) -> String {
        match self {
            AugmentationTag::Identity => "identity".to_string(),
            AugmentationTag::Rotation { axis, angle } => {
                let a = match axis {
                    Axis::X => 'x',
                    Axis::Y => 'y',
                    Axis::Z => 'z',
                };
                let deg = match angle {
                    RotationAngle::Deg90 => 90,
                    RotationAngle::Deg180 => 180,
                    RotationAngle::Deg270 => 270,
                };
                format!("rot_{a}_{deg}")
            }
            AugmentationTag::Flip { plane } => {
                let p = match plane {
                    Plane::Xy => "xy",
                    Plane::Yz => "yz",
                    Plane::Xz => "xz",
                };
                format!("flip_{p}")
            }
        }
    }

    /// Output dims of the transform for the given input dims.
    pub fn apply_dims(&self, dims: (usize, usize, usize)) -> (usize, usize, usize) {
        let (nx, ny, nz) = dims;
        match self {
            AugmentationTag::Identity | AugmentationTag::Flip { .. } => dims,
            AugmentationTag::Rotation { axis, angle } => match (axis, angle) {
                (_, RotationAngle::Deg180) => dims,
                (Axis::Z, _) => (ny, nx, nz),
                (Axis::X, _) => (nx, nz, ny),
                (Axis::Y, _) => (nz, ny, nx),
            },
        }
    }
}

/// Applies `tag` to an x-fastest grid, returning the transformed data and
/// its dims.
pub fn transform_grid<T: Copy + Default>(
    data: &[T],
    dims: (usize, usize, usize),
    tag: AugmentationTag,
) -> (Vec<T>, (usize, usize, usize)) {
    match tag {
        AugmentationTag::Identity => (data.to_vec(), dims),
        AugmentationTag::Flip { plane } => (flip(data, dims, plane), dims),
        AugmentationTag::Rotation { axis, angle } => {
            let mut cur = data.to_vec();
            let mut d = dims;
            for _ in 0..angle.quarter_turns() {
                let (next, nd) = rot90(&cur, d, axis);
                cur = next;
                d = nd;
            }
            (cur, d)
        }
    }
}

fn flip<T: Copy>(data: &[T], dims: (usize, usize, usize), plane: Plane) -> Vec<T> {
    let (nx, ny, nz) = dims;
    let mut out = data.to_vec();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let (sx, sy, sz) = match plane {
                    Plane::Yz => (nx - 1 - x, y, z),
                    Plane::Xz => (x, ny - 1 - y, z),
                    Plane::Xy => (x, y, nz - 1 - z),
                };
                out[x + nx * (y + ny * z)] = data[sx + nx * (sy + ny * sz)];
            }
        }
    }
    out
}

/// One quarter turn about `axis`. The in-plane pair maps like a 2D rot90:
/// about z, new (x', y') reads old (y', ny-1-x').
fn rot90<T: Copy + Default>(
    data: &[T],
    dims: (usize, usize, usize),
    axis: Axis,
) -> (Vec<T>, (usize, usize, usize)) {
    let (nx, ny, nz) = dims;
    let nd = match axis {
        Axis::Z => (ny, nx, nz),
        Axis::X => (nx, nz, ny),
        Axis::Y => (nz, ny, nx),
    };
    let mut out = vec![T::default(); data.len()];
    for z in 0..nd.2 {
        for y in 0..nd.1 {
            for x in 0..nd.0 {
                let (sx, sy, sz) = match axis {
                    Axis::Z => (y, ny - 1 - x, z),
                    Axis::X => (x, z, nz - 1 - y),
                    Axis::Y => (nx - 1 - z, y, x),
                };
                out[x + nd.0 * (y + nd.1 * z)] = data[sx + nx * (sy + ny * sz)];
            }
        }
    }
    (out, nd)
}

/// All 13 augmented copies of a volume (voxels and mask transformed
/// together, spacing permuted alongside the axes).
pub fn augment_volume(v: &Volume) -> Vec<(AugmentationTag, Volume)> {
    AugmentationTag::all()
        .into_iter()
        .map(|tag| {
            let (voxels, nd) = transform_grid(v.voxels(), v.dims(), tag);
            let (mask, _) = transform_grid(v.mask(), v.dims(), tag);
            let spacing = permute_spacing(v.spacing(), v.dims(), nd, tag);
            let vol = Volume::new(nd, spacing, voxels, mask)
                .expect("transform preserves volume validity");
            (tag, vol)
        })
        .collect()
}

fn permute_spacing(
    spacing: (f64, f64, f64),
    _old_dims: (usize, usize, usize),
    _new_dims: (usize, usize, usize),
    tag: AugmentationTag,
) -> (f64, f64, f64) {
    let (sx, sy, sz) = spacing;
    match tag {
        AugmentationTag::Identity | AugmentationTag::Flip { .. } => spacing,
        AugmentationTag::Rotation { axis, angle } => match (axis, angle) {
            (_, RotationAngle::Deg180) => spacing,
            (Axis::Z, _) => (sy, sx, sz),
            (Axis::X, _) => (sx, sz, sy),
            (Axis::Y, _) => (sz, sy, sx),
        },
    }
}

/// The 13 augmented copies of a nodule tensor. Rotations permute the
/// tensor's axes, so outputs may differ in shape; re-embed into a common
/// dataset shape when feeding a CNN.
pub fn augment(t: &NoduleTensor) -> Vec<NoduleTensor> {
    AugmentationTag::all()
        .into_iter()
        .map(|tag| {
            let (values, nd) = transform_grid(&t.values, t.shape, tag);
            NoduleTensor {
                shape: nd,
                values,
                label: t.label,
                nodule_id: t.nodule_id.clone(),
                tag,
            }
        })
        .collect()
}
