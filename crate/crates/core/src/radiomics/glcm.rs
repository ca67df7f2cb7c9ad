//! Gray-level co-occurrence matrices over the 3D 13-direction neighborhood.

use super::RadiomicsError;
use crate::ingest::Volume;

/// The five gray-level counts.
pub const LEVELS: [usize; 5] = [8, 16, 32, 64, 128];

/// The four voxel distances.
pub const DISTANCES: [usize; 4] = [1, 2, 3, 4];

/// The thirteen 3D directions, as `(dx, dy, dz)` voxel offsets. Together
/// with symmetric accumulation they cover the full 26-neighborhood.
pub const DIRECTIONS: [(i32, i32, i32); 13] = [
    (0, 1, 0),
    (-1, 1, 0),
    (-1, 0, 0),
    (-1, -1, 0),
    (0, 1, -1),
    (0, 0, -1),
    (0, -1, -1),
    (-1, 0, -1),
    (1, 0, -1),
    (-1, 1, -1),
    (1, -1, -1),
    (-1, -1, -1),
    (1, 1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmConfig {
    pub levels: usize,
    pub distance: usize,
    pub direction: (i32, i32, i32),
}

/// All 260 configurations (5 levels x 4 distances x 13 directions).
pub fn all_configs() -> Vec<GlcmConfig> {
    let mut out = Vec::with_capacity(260);
    for &levels in &LEVELS {
        for &distance in &DISTANCES {
            for &direction in &DIRECTIONS {
                out.push(GlcmConfig {
                    levels,
                    distance,
                    direction,
                });
            }
        }
    }
    out
}

/// A symmetric co-occurrence matrix; `counts[i * levels + j]` holds the
/// (symmetrized) pair count of levels `i` and `j` (0-based).
#[derive(Debug, Clone)]
pub struct Glcm {
    pub levels: usize,
    pub counts: Vec<u64>,
    pub total: u64,
    pub config: GlcmConfig,
}

impl Glcm {
    /// True when no valid voxel pair exists for this configuration.
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Normalized probability at 0-based level pair `(i, j)`.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[i * self.levels + j] as f64 / self.total as f64
        }
    }
}

/// Linear quantization of masked intensities into `levels` bins over the
/// masked [min, max] range, top edge inclusive. Returns one 0-based level
/// per voxel (unmasked voxels get an unused sentinel). A constant volume
/// puts every masked voxel in bin 0.
pub fn quantize_masked(v: &Volume, levels: usize) -> Result<Vec<u16>, RadiomicsError> {
    let masked = v.masked_values();
    if masked.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    let min = masked.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = masked.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let mut out = vec![u16::MAX; v.voxels().len()];
    for (i, (&val, &m)) in v.voxels().iter().zip(v.mask()).enumerate() {
        if m == 1 {
            let level = if range == 0.0 {
                0
            } else {
                let raw = ((val - min) / range * levels as f64).floor() as usize;
                raw.min(levels - 1)
            };
            out[i] = level as u16;
        }
    }
    Ok(out)
}

/// Builds a symmetric GLCM: every ordered masked pair `(q, q + d*dir)`
/// increments both `counts[l(q)][l(p)]` and its transpose. Unmasked or
/// out-of-bounds partners contribute nothing.
pub fn build_glcm(v: &Volume, config: GlcmConfig) -> Result<Glcm, RadiomicsError> {
    let levels = quantize_masked(v, config.levels)?;
    Ok(build_glcm_quantized(v, &levels, config))
}

/// GLCM from precomputed quantized levels (shared across distances and
/// directions for one level count).
pub(crate) fn build_glcm_quantized(v: &Volume, levels: &[u16], config: GlcmConfig) -> Glcm {
    let (nx, ny, nz) = v.dims();
    let l = config.levels;
    let mut counts = vec![0u64; l * l];
    let d = config.distance as i32;
    let (dx, dy, dz) = (
        config.direction.0 * d,
        config.direction.1 * d,
        config.direction.2 * d,
    );
    let mut total = 0u64;
    for z in 0..nz as i32 {
        let pz = z + dz;
        if pz < 0 || pz >= nz as i32 {
            continue;
        }
        for y in 0..ny as i32 {
            let py = y + dy;
            if py < 0 || py >= ny as i32 {
                continue;
            }
            for x in 0..nx as i32 {
                let px = x + dx;
                if px < 0 || px >= nx as i32 {
                    continue;
                }
                let qi = x as usize + nx * (y as usize + ny * z as usize);
                let pi = px as usize + nx * (py as usize + ny * pz as usize);
                let lq = levels[qi];
                let lp = levels[pi];
                if lq == u16::MAX || lp == u16::MAX {
                    continue;
                }
                counts[lq as usize * l + lp as usize] += 1;
                counts[lp as usize * l + lq as usize] += 1;
                total += 2;
            }
        }
    }
    Glcm {
        levels: l,
        counts,
        total,
        config,
    }
}
