use super::IngestError;

/// A 3D scalar field with voxel spacing and a binary region-of-interest mask.
///
/// Voxels are stored x-fastest: `index = x + nx*(y + ny*z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    voxels: Vec<f64>,
    mask: Vec<u8>,
}

impl Volume {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        voxels: Vec<f64>,
        mask: Vec<u8>,
    ) -> Result<Self, IngestError> {
        let want = dims.0 * dims.1 * dims.2;
        if voxels.len() != want {
            return Err(IngestError::VoxelLenMismatch {
                dims,
                got: voxels.len(),
                want,
            });
        }
        if mask.len() != want {
            return Err(IngestError::MaskLenMismatch {
                dims,
                got: mask.len(),
                want,
            });
        }
        for s in [spacing.0, spacing.1, spacing.2] {
            if !(s.is_finite() && s > 0.0) {
                return Err(IngestError::BadSpacing(spacing));
            }
        }
        if let Some(i) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(IngestError::NonFiniteVoxel(i));
        }
        if let Some((i, &value)) = mask.iter().enumerate().find(|(_, &m)| m > 1) {
            return Err(IngestError::NonBinaryMask { index: i, value });
        }
        if !mask.iter().any(|&m| m == 1) {
            return Err(IngestError::EmptyMask);
        }
        Ok(Self {
            dims,
            spacing,
            voxels,
            mask,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.0 * (y + self.dims.1 * z)
    }

    #[inline]
    pub fn voxel(&self, x: usize, y: usize, z: usize) -> f64 {
        self.voxels[self.index(x, y, z)]
    }

    #[inline]
    pub fn masked(&self, x: usize, y: usize, z: usize) -> bool {
        self.mask[self.index(x, y, z)] == 1
    }

    /// Intensities of masked voxels, in storage order.
    pub fn masked_values(&self) -> Vec<f64> {
        self.voxels
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m == 1)
            .map(|(&v, _)| v)
            .collect()
    }

    /// `(x, y, z)` indices of masked voxels, in storage order.
    pub fn masked_coords(&self) -> Vec<(usize, usize, usize)> {
        let (nx, ny, nz) = self.dims;
        let mut out = Vec::new();
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    if self.masked(x, y, z) {
                        out.push((x, y, z));
                    }
                }
            }
        }
        out
    }

    /// Inclusive ROI bounding box `((x0, y0, z0), (x1, y1, z1))`.
    pub fn roi_bbox(&self) -> ((usize, usize, usize), (usize, usize, usize)) {
        let (nx, ny, nz) = self.dims;
        let (mut x0, mut y0, mut z0) = (nx, ny, nz);
        let (mut x1, mut y1, mut z1) = (0usize, 0usize, 0usize);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    if self.masked(x, y, z) {
                        x0 = x0.min(x);
                        y0 = y0.min(y);
                        z0 = z0.min(z);
                        x1 = x1.max(x);
                        y1 = y1.max(y);
                        z1 = z1.max(z);
                    }
                }
            }
        }
        ((x0, y0, z0), (x1, y1, z1))
    }

    /// ROI bounding-box extent in voxels per axis.
    pub fn roi_extent(&self) -> (usize, usize, usize) {
        let ((x0, y0, z0), (x1, y1, z1)) = self.roi_bbox();
        (x1 - x0 + 1, y1 - y0 + 1, z1 - z0 + 1)
    }

    /// ROI centroid in voxel index space (mean of masked voxel indices).
    pub fn roi_centroid(&self) -> (f64, f64, f64) {
        let coords = self.masked_coords();
        let n = coords.len() as f64;
        let (mut cx, mut cy, mut cz) = (0.0, 0.0, 0.0);
        for (x, y, z) in coords {
            cx += x as f64;
            cy += y as f64;
            cz += z as f64;
        }
        (cx / n, cy / n, cz / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize) -> Volume {
        let len = n * n * n;
        Volume::new((n, n, n), (1.0, 1.0, 1.0), vec![1.0; len], vec![1; len]).unwrap()
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let err = Volume::new((2, 2, 2), (1.0, 1.0, 1.0), vec![0.0; 7], vec![1; 8]);
        assert!(matches!(err, Err(IngestError::VoxelLenMismatch { .. })));
    }

    #[test]
    fn rejects_empty_mask() {
        let err = Volume::new((2, 2, 2), (1.0, 1.0, 1.0), vec![0.0; 8], vec![0; 8]);
        assert!(matches!(err, Err(IngestError::EmptyMask)));
    }

    #[test]
    fn rejects_bad_spacing() {
        let err = Volume::new((2, 2, 2), (1.0, 0.0, 1.0), vec![0.0; 8], vec![1; 8]);
        assert!(matches!(err, Err(IngestError::BadSpacing(_))));
    }

    #[test]
    fn rejects_nonbinary_mask() {
        let mut mask = vec![1; 8];
        mask[3] = 2;
        let err = Volume::new((2, 2, 2), (1.0, 1.0, 1.0), vec![0.0; 8], mask);
        assert!(matches!(
            err,
            Err(IngestError::NonBinaryMask { index: 3, value: 2 })
        ));
    }

    #[test]
    fn bbox_of_full_cube() {
        let v = cube(3);
        assert_eq!(v.roi_bbox(), ((0, 0, 0), (2, 2, 2)));
        assert_eq!(v.roi_extent(), (3, 3, 3));
    }

    #[test]
    fn centroid_of_single_voxel() {
        let mut mask = vec![0; 27];
        mask[13] = 1; // (1,1,1)
        let v = Volume::new((3, 3, 3), (1.0, 1.0, 1.0), vec![0.0; 27], mask).unwrap();
        assert_eq!(v.roi_centroid(), (1.0, 1.0, 1.0));
    }
}
