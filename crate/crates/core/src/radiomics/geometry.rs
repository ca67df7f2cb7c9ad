//! Geometric descriptors from the second-moment ellipsoid of the masked
//! voxel coordinates (mm), plus volume, bounding box and surface area.

use nalgebra::Matrix3;

use super::RadiomicsError;
use crate::ingest::Volume;

/// Relative floor applied to the smallest eigenvalue when forming
/// eigenvalue ratios; flat (coplanar) masks would otherwise divide by zero.
/// Elongation saturates at 1e6 for such masks.
const EIGEN_REL_FLOOR: f64 = 1e-12;

/// The 8 geometric features in [`super::GEOMETRY_NAMES`] order:
/// volume, major diameter, minor diameter, eccentricity, elongation,
/// orientation, bounding box volume, perimeter.
///
/// Diameters follow the region-properties convention `4 * sqrt(lambda)`
/// on the eigenvalues (population covariance of voxel-center coordinates);
/// orientation is the angle in degrees, within [0, 90], between the major
/// eigenvector and the z axis; perimeter is the exposed-face surface area
/// in mm^2. A single-voxel mask reports zero diameters, eccentricity 0 and
/// elongation 1.
pub fn geometric_features(v: &Volume) -> Result<[f64; 8], RadiomicsError> {
    let coords = v.masked_coords();
    if coords.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    let (sx, sy, sz) = v.spacing();
    let n = coords.len() as f64;

    let volume = n * sx * sy * sz;

    // Population covariance of voxel centers in mm.
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    for &(x, y, z) in &coords {
        mx += x as f64 * sx;
        my += y as f64 * sy;
        mz += z as f64 * sz;
    }
    mx /= n;
    my /= n;
    mz /= n;
    let mut c = [[0.0f64; 3]; 3];
    for &(x, y, z) in &coords {
        let d = [x as f64 * sx - mx, y as f64 * sy - my, z as f64 * sz - mz];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += d[i] * d[j];
            }
        }
    }
    for row in &mut c {
        for val in row.iter_mut() {
            *val /= n;
        }
    }

    let m = Matrix3::new(
        c[0][0], c[0][1], c[0][2], c[1][0], c[1][1], c[1][2], c[2][0], c[2][1], c[2][2],
    );
    let eig = m.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l1 = eig.eigenvalues[order[0]].max(0.0);
    let l3 = eig.eigenvalues[order[2]].max(0.0);
    let v1 = eig.eigenvectors.column(order[0]);

    let (major, minor, eccentricity, elongation, orientation);
    if l1 <= 1e-24 {
        // Single voxel (or numerically point-like): degenerate convention.
        major = 0.0;
        minor = 0.0;
        eccentricity = 0.0;
        elongation = 1.0;
        orientation = 0.0;
    } else {
        major = 4.0 * l1.sqrt();
        minor = 4.0 * l3.sqrt();
        eccentricity = (1.0 - l3 / l1).sqrt();
        elongation = (l1 / l3.max(EIGEN_REL_FLOOR * l1)).sqrt();
        let cos = (v1[2].abs() / v1.norm()).clamp(0.0, 1.0);
        orientation = cos.acos().to_degrees();
    }

    let ((x0, y0, z0), (x1, y1, z1)) = v.roi_bbox();
    let bbox = ((x1 - x0 + 1) as f64 * sx)
        * ((y1 - y0 + 1) as f64 * sy)
        * ((z1 - z0 + 1) as f64 * sz);

    let perimeter = surface_area(v);

    Ok([
        volume,
        major,
        minor,
        eccentricity,
        elongation,
        orientation,
        bbox,
        perimeter,
    ])
}

/// Exposed-face surface area: every masked-voxel face adjacent to an
/// unmasked or out-of-bounds voxel contributes its face area.
fn surface_area(v: &Volume) -> f64 {
    let (nx, ny, nz) = v.dims();
    let (sx, sy, sz) = v.spacing();
    let face = [sy * sz, sx * sz, sx * sy]; // areas of +-x, +-y, +-z faces
    let mut total = 0.0;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !v.masked(x, y, z) {
                    continue;
                }
                let neighbors: [(i64, i64, i64, usize); 6] = [
                    (x as i64 - 1, y as i64, z as i64, 0),
                    (x as i64 + 1, y as i64, z as i64, 0),
                    (x as i64, y as i64 - 1, z as i64, 1),
                    (x as i64, y as i64 + 1, z as i64, 1),
                    (x as i64, y as i64, z as i64 - 1, 2),
                    (x as i64, y as i64, z as i64 + 1, 2),
                ];
                for (ax, ay, az, f) in neighbors {
                    let outside = ax < 0
                        || ay < 0
                        || az < 0
                        || ax >= nx as i64
                        || ay >= ny as i64
                        || az >= nz as i64;
                    if outside || !v.masked(ax as usize, ay as usize, az as usize) {
                        total += face[f];
                    }
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn solid(dims: (usize, usize, usize), spacing: (f64, f64, f64)) -> Volume {
        let len = dims.0 * dims.1 * dims.2;
        Volume::new(dims, spacing, vec![1.0; len], vec![1; len]).unwrap()
    }

    #[test]
    fn cube_values() {
        let f = geometric_features(&solid((10, 10, 10), (1.0, 1.0, 1.0))).unwrap();
        assert_eq!(f[0], 1000.0); // volume
        assert_abs_diff_eq!(f[3], 0.0, epsilon = 1e-6); // eccentricity
        assert_abs_diff_eq!(f[4], 1.0, epsilon = 1e-6); // elongation
        assert_eq!(f[6], 1000.0); // bounding box
        assert_eq!(f[7], 600.0); // surface area
    }

    #[test]
    fn rod_along_z_has_zero_orientation() {
        let mut mask = vec![0u8; 3 * 3 * 9];
        for z in 0..9 {
            mask[1 + 3 * (1 + 3 * z)] = 1;
        }
        let v = Volume::new((3, 3, 9), (1.0, 1.0, 1.0), vec![1.0; 81], mask).unwrap();
        let f = geometric_features(&v).unwrap();
        assert_abs_diff_eq!(f[5], 0.0, epsilon = 1e-9); // orientation
        assert!(f[4] > 1.0); // elongated
        assert!(f[4].is_finite());
    }

    #[test]
    fn single_voxel_degenerate_convention() {
        let mut mask = vec![0u8; 27];
        mask[13] = 1;
        let v = Volume::new((3, 3, 3), (1.0, 1.0, 1.0), vec![1.0; 27], mask).unwrap();
        let f = geometric_features(&v).unwrap();
        assert_eq!(f[1], 0.0); // major
        assert_eq!(f[2], 0.0); // minor
        assert_eq!(f[3], 0.0); // eccentricity
        assert_eq!(f[4], 1.0); // elongation
        assert_eq!(f[0], 1.0);
        assert_eq!(f[7], 6.0);
    }

    #[test]
    fn doubling_spacing_doubles_diameters_and_scales_volumes() {
        let v1 = solid((6, 5, 4), (1.0, 1.0, 1.0));
        let v2 = solid((6, 5, 4), (2.0, 2.0, 2.0));
        let a = geometric_features(&v1).unwrap();
        let b = geometric_features(&v2).unwrap();
        assert_abs_diff_eq!(b[0], 8.0 * a[0], epsilon = 1e-9); // volume
        assert_abs_diff_eq!(b[1], 2.0 * a[1], epsilon = 1e-9); // major
        assert_abs_diff_eq!(b[2], 2.0 * a[2], epsilon = 1e-9); // minor
        assert_abs_diff_eq!(b[6], 8.0 * a[6], epsilon = 1e-9); // bbox
        assert_abs_diff_eq!(b[7], 4.0 * a[7], epsilon = 1e-9); // surface
    }
}
