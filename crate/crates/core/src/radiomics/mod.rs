//! The 29 handcrafted features: 9 intensity statistics, 8 geometric
//! descriptors, and 12 GLCM texture statistics averaged over all 260
//! co-occurrence configurations (5 gray levels x 4 distances x 13
//! directions).

mod geometry;
mod glcm;
mod intensity;
mod texture;

pub use geometry::geometric_features;
pub use glcm::{
    all_configs, build_glcm, quantize_masked, Glcm, GlcmConfig, DIRECTIONS, DISTANCES, LEVELS,
};
pub use intensity::intensity_features;
pub use texture::{texture_features, texture_stats_from_glcm, TEXTURE_NAMES};

use thiserror::Error;

use crate::ingest::Volume;

#[derive(Debug, Error)]
pub enum RadiomicsError {
    #[error("volume has no masked voxels")]
    EmptyMask,
    #[error("feature {0:?} evaluated non-finite")]
    NonFinite(String),
}

pub const INTENSITY_NAMES: [&str; 9] = [
    "minimum",
    "maximum",
    "mean",
    "stand_deviation",
    "sum",
    "median",
    "skewness",
    "kurtosis",
    "variance",
];

pub const GEOMETRY_NAMES: [&str; 8] = [
    "volume",
    "major_diameter",
    "minor_diameter",
    "eccentricity",
    "elongation",
    "orientation",
    "bounding_box_volume",
    "perimeter",
];

/// The 29 handcrafted feature names in table order.
pub fn handcrafted_names() -> Vec<String> {
    INTENSITY_NAMES
        .iter()
        .chain(GEOMETRY_NAMES.iter())
        .chain(TEXTURE_NAMES.iter())
        .map(|s| s.to_string())
        .collect()
}

/// Names of the two CNN output-layer features appended in fusion tables.
pub const CNN_FEATURE_NAMES: [&str; 2] = ["cnn_feature_p", "cnn_feature_n"];

/// A named 29-value handcrafted feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; 29],
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        handcrafted_names()
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// Computes all 29 handcrafted features of a masked volume.
pub fn handcrafted(v: &Volume) -> Result<FeatureVector, RadiomicsError> {
    let intensity = intensity_features(v)?;
    let geometry = geometric_features(v)?;
    let texture = texture_features(v)?;
    let mut values = [0.0; 29];
    values[..9].copy_from_slice(&intensity);
    values[9..17].copy_from_slice(&geometry);
    values[17..].copy_from_slice(&texture);
    let names = handcrafted_names();
    for (i, &val) in values.iter().enumerate() {
        if !val.is_finite() {
            return Err(RadiomicsError::NonFinite(names[i].clone()));
        }
    }
    Ok(FeatureVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_volume() -> Volume {
        // 10^3 masked cube of constant 4.0 at 1 mm spacing inside a 12^3 grid.
        let side = 12;
        let len = side * side * side;
        let mut voxels = vec![0.0; len];
        let mut mask = vec![0u8; len];
        for z in 1..11 {
            for y in 1..11 {
                for x in 1..11 {
                    let i = x + side * (y + side * z);
                    voxels[i] = 4.0;
                    mask[i] = 1;
                }
            }
        }
        Volume::new((side, side, side), (1.0, 1.0, 1.0), voxels, mask).unwrap()
    }

    #[test]
    fn produces_29_finite_named_values() {
        let fv = handcrafted(&cube_volume()).unwrap();
        assert_eq!(handcrafted_names().len(), 29);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn cube_volume_feature_is_1000() {
        let fv = handcrafted(&cube_volume()).unwrap();
        assert_eq!(fv.get("volume"), Some(1000.0));
        assert_eq!(fv.get("bounding_box_volume"), Some(1000.0));
    }

    #[test]
    fn intensity_shift_moves_only_location_features() {
        // Integer voxel values and an integer shift keep quantization exact.
        let side = 6;
        let len = side * side * side;
        let mut voxels = vec![0.0; len];
        for (i, v) in voxels.iter_mut().enumerate() {
            *v = ((i * 2654435761) % 23) as f64;
        }
        let mask = vec![1u8; len];
        let v0 = Volume::new((side, side, side), (1.0, 1.0, 1.0), voxels.clone(), mask.clone())
            .unwrap();
        let shifted: Vec<f64> = voxels.iter().map(|x| x + 16.0).collect();
        let v1 = Volume::new((side, side, side), (1.0, 1.0, 1.0), shifted, mask).unwrap();
        let a = handcrafted(&v0).unwrap();
        let b = handcrafted(&v1).unwrap();
        let names = handcrafted_names();
        let location = ["minimum", "maximum", "mean", "median"];
        let n_masked = len as f64;
        for (i, name) in names.iter().enumerate() {
            if name == "sum" {
                assert!(
                    (b.values[i] - a.values[i] - 16.0 * n_masked).abs() < 1e-6,
                    "sum should shift by 16 per masked voxel"
                );
            } else if location.contains(&name.as_str()) {
                assert!(
                    (a.values[i] - (b.values[i] - 16.0)).abs() < 1e-9,
                    "{name} should shift by 16"
                );
            } else {
                let denom = a.values[i].abs().max(1.0);
                assert!(
                    (a.values[i] - b.values[i]).abs() / denom < 1e-9,
                    "{name} should be shift-invariant: {} vs {}",
                    a.values[i],
                    b.values[i]
                );
            }
        }
    }

    #[test]
    fn features_invariant_under_augmentation_except_orientation() {
        use crate::ingest::augment_volume;
        // Random blob at isotropic spacing.
        let side = 7;
        let len = side * side * side;
        let mut voxels = vec![0.0; len];
        let mut mask = vec![0u8; len];
        for i in 0..len {
            voxels[i] = ((i * 40503) % 29) as f64;
            mask[i] = u8::from((i * 2654435761) % 3 != 0);
        }
        mask[0] = 1;
        let v = Volume::new((side, side, side), (1.0, 1.0, 1.0), voxels, mask).unwrap();
        let base = handcrafted(&v).unwrap();
        let names = handcrafted_names();
        for (tag, av) in augment_volume(&v) {
            let fv = handcrafted(&av).unwrap();
            for (i, name) in names.iter().enumerate() {
                if name == "orientation" {
                    continue;
                }
                let denom = base.values[i].abs().max(1.0);
                assert!(
                    (base.values[i] - fv.values[i]).abs() / denom < 1e-9,
                    "{name} changed under {tag:?}: {} vs {}",
                    base.values[i],
                    fv.values[i]
                );
            }
        }
    }
}
