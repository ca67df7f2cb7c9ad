//! The 12 GLCM texture statistics, averaged over all 260 configurations.

use super::glcm::{build_glcm_quantized, quantize_masked, Glcm, GlcmConfig, DIRECTIONS, DISTANCES, LEVELS};
use super::RadiomicsError;
use crate::ingest::Volume;

pub const TEXTURE_NAMES: [&str; 12] = [
    "energy",
    "entropy",
    "correlation",
    "contrast",
    "texture_variance",
    "sum_mean",
    "inertia",
    "cluster_shade",
    "cluster_prominence",
    "homogeneity",
    "max_probability",
    "inverse_variance",
];

/// The 12 statistics of one normalized GLCM, with level indices 1..=L:
/// energy, entropy (base-2, 0 log 0 = 0), correlation (0 when a marginal
/// std is 0), contrast, texture variance, sum-mean, inertia (numerically
/// the same sum as contrast), cluster shade, cluster prominence,
/// homogeneity, max-probability, inverse variance (off-diagonal only).
/// An empty GLCM returns all zeros.
pub fn texture_stats_from_glcm(g: &Glcm) -> [f64; 12] {
    if g.is_empty() {
        return [0.0; 12];
    }
    let l = g.levels;
    let total = g.total as f64;

    // Marginal mean/std over level indices 1..=L.
    let (mut mu_x, mut mu_y) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = g.counts[i * l + j] as f64 / total;
            mu_x += (i + 1) as f64 * p;
            mu_y += (j + 1) as f64 * p;
        }
    }
    let (mut var_x, mut var_y) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = g.counts[i * l + j] as f64 / total;
            var_x += ((i + 1) as f64 - mu_x).powi(2) * p;
            var_y += ((j + 1) as f64 - mu_y).powi(2) * p;
        }
    }
    let sigma_x = var_x.sqrt();
    let sigma_y = var_y.sqrt();

    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut correlation = 0.0;
    let mut contrast = 0.0;
    let mut texture_variance = 0.0;
    let mut sum_mean = 0.0;
    let mut cluster_shade = 0.0;
    let mut cluster_prominence = 0.0;
    let mut homogeneity = 0.0;
    let mut max_probability = 0.0f64;
    let mut inverse_variance = 0.0;

    for i in 0..l {
        for j in 0..l {
            let c = g.counts[i * l + j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total;
            let fi = (i + 1) as f64;
            let fj = (j + 1) as f64;
            energy += p * p;
            entropy -= p * p.log2();
            let diff = fi - fj;
            contrast += diff * diff * p;
            texture_variance += (fi - mu_x).powi(2) * p;
            sum_mean += 0.5 * (fi + fj) * p;
            let dev = fi + fj - mu_x - mu_y;
            cluster_shade += dev.powi(3) * p;
            cluster_prominence += dev.powi(4) * p;
            homogeneity += p / (1.0 + diff.abs());
            max_probability = max_probability.max(p);
            if i != j {
                inverse_variance += p / (diff * diff);
            }
            if sigma_x > 0.0 && sigma_y > 0.0 {
                correlation += (fi - mu_x) * (fj - mu_y) * p / (sigma_x * sigma_y);
            }
        }
    }
    let inertia = contrast;

    [
        energy,
        entropy,
        correlation,
        contrast,
        texture_variance,
        sum_mean,
        inertia,
        cluster_shade,
        cluster_prominence,
        homogeneity,
        max_probability,
        inverse_variance,
    ]
}

/// The 12 texture features of a volume: each statistic computed per
/// configuration and arithmetically averaged over all 260 configurations,
/// excluding empty GLCMs (all empty yields zeros).
pub fn texture_features(v: &Volume) -> Result<[f64; 12], RadiomicsError> {
    let mut sums = [0.0; 12];
    let mut nonempty = 0u32;
    // Quantization depends only on the level count; share it across the 52
    // distance/direction combinations per level count.
    for &levels in &LEVELS {
        let quantized = quantize_masked(v, levels)?;
        for &distance in &DISTANCES {
            for &direction in &DIRECTIONS {
                let cfg = GlcmConfig {
                    levels,
                    distance,
                    direction,
                };
                let g = build_glcm_quantized(v, &quantized, cfg);
                if g.is_empty() {
                    continue;
                }
                let stats = texture_stats_from_glcm(&g);
                sums.iter_mut().zip(&stats).for_each(|(s, &x)| *s += x);
                nonempty += 1;
            }
        }
    }
    if nonempty == 0 {
        return Ok([0.0; 12]);
    }
    for s in &mut sums {
        *s /= f64::from(nonempty);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiomics::glcm::GlcmConfig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_volume_point_mass_stats() {
        let v = Volume::new((4, 4, 4), (1.0, 1.0, 1.0), vec![3.0; 64], vec![1; 64]).unwrap();
        let f = texture_features(&v).unwrap();
        let by_name = |n: &str| f[TEXTURE_NAMES.iter().position(|t| *t == n).unwrap()];
        assert_abs_diff_eq!(by_name("energy"), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(by_name("entropy"), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(by_name("contrast"), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(by_name("inertia"), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(by_name("homogeneity"), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(by_name("max_probability"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_of_hand_example() {
        let voxels = vec![0.0, 10.0, 0.0, 0.0];
        let v = Volume::new((2, 2, 1), (1.0, 1.0, 1.0), voxels, vec![1; 4]).unwrap();
        let g = crate::radiomics::build_glcm(
            &v,
            GlcmConfig {
                levels: 2,
                distance: 1,
                direction: (0, 1, 0),
            },
        )
        .unwrap();
        let stats = texture_stats_from_glcm(&g);
        // p = {0.5, 0.25, 0.25}: energy = 0.25 + 0.0625 + 0.0625 = 0.375.
        assert_abs_diff_eq!(stats[0], 0.375, epsilon = 1e-15);
    }

    #[test]
    fn affine_intensity_map_leaves_texture_unchanged() {
        // Integer voxels, power-of-two scale and integer offset keep the
        // quantization arithmetic exact.
        let mut voxels = vec![0.0; 216];
        for (i, v) in voxels.iter_mut().enumerate() {
            *v = ((i * 104729) % 19) as f64;
        }
        let mask = vec![1u8; 216];
        let base = Volume::new((6, 6, 6), (1.0, 1.0, 1.0), voxels.clone(), mask.clone()).unwrap();
        let mapped: Vec<f64> = voxels.iter().map(|x| 4.0 * x + 11.0).collect();
        let scaled = Volume::new((6, 6, 6), (1.0, 1.0, 1.0), mapped, mask).unwrap();
        let a = texture_features(&base).unwrap();
        let b = texture_features(&scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn stat_ranges() {
        let mut voxels = vec![0.0; 343];
        for (i, v) in voxels.iter_mut().enumerate() {
            *v = ((i * 31) % 53) as f64;
        }
        let v = Volume::new((7, 7, 7), (1.0, 1.0, 1.0), voxels, vec![1; 343]).unwrap();
        let f = texture_features(&v).unwrap();
        let by_name = |n: &str| f[TEXTURE_NAMES.iter().position(|t| *t == n).unwrap()];
        assert!(by_name("energy") > 0.0 && by_name("energy") <= 1.0);
        assert!(by_name("entropy") >= 0.0);
        assert!(by_name("homogeneity") > 0.0 && by_name("homogeneity") <= 1.0);
        assert!(by_name("max_probability") > 0.0 && by_name("max_probability") <= 1.0);
        assert!(by_name("contrast") >= 0.0);
    }
}
