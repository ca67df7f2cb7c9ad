//! Core library for a lung-nodule malignancy classification pipeline.
//!
//! The pipeline fuses handcrafted radiomics features (intensity, geometry,
//! GLCM texture) with the output-layer features of a from-scratch 3D CNN,
//! then classifies with an RBF-kernel SVM behind wrapper feature selection.
//!
//! Modules:
//! - [`ingest`]: volume/mask loading, isotropic spline resampling, fixed-size
//!   nodule tensor construction, and the 13-variant augmentation set.
//! - [`radiomics`]: the 29 handcrafted features (9 intensity, 8 geometric,
//!   12 GLCM texture averaged over 260 co-occurrence configurations).
//! - [`neural`]: 3D CNN engine (forward + backprop), the three architecture
//!   presets, Adam training with balanced batches, feature extraction.
//! - [`learn`]: RBF-SVM via SMO, sequential forward selection, SMOTE,
//!   variance filter and ReliefF baselines.
//! - [`eval`]: ROC/AUC, confusion metrics, ISO-accuracy analysis, and the
//!   stratified 5-fold cross-validation harness.
//! - [`table`]: the feature table (rows = nodules) and its CSV form.

pub mod eval;
pub mod ingest;
pub mod learn;
pub mod neural;
pub mod oracles;
pub mod radiomics;
pub mod seed;
pub mod table;
