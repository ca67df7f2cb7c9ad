//! Declarative layer specifications, shape inference and the architecture
//! presets.

use serde::{Deserialize, Serialize};

use super::layers::SpatialShape;
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// TensorFlow-style SAME: output length `ceil(d / stride)`, window may
    /// overhang (pools reduce over in-bounds elements only).
    Same,
    /// No padding: output length `(d - k) / stride + 1`.
    Valid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv3d {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: Padding,
    },
    MaxPool3d {
        window: usize,
        stride: usize,
        padding: Padding,
    },
    /// Three branches reaching a common spatial shape: the full map pooled
    /// twice, a center half-crop pooled once, and a center quarter-crop,
    /// concatenated along channels (channels x3).
    MultiCrop,
    Dense {
        units: usize,
    },
    /// `relu((x - mean) / sqrt(var + 1e-5) * gamma + beta)` with statistics
    /// over all units (channels and spatial positions) of the sample and
    /// per-unit gamma/beta.
    LayerNormRelu,
    /// Inverted dropout: train-time scaling by `1 / keep_prob`, identity at
    /// inference.
    Dropout {
        keep_prob: f64,
    },
    /// Final affine layer with bias; its pre-softmax activations are the
    /// output-layer features.
    Output {
        units: usize,
    },
}

/// Inferred output shape of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorShape {
    Spatial(SpatialShape),
    Flat(usize),
}

impl TensorShape {
    pub fn len(&self) -> usize {
        match self {
            TensorShape::Spatial(s) => s.len(),
            TensorShape::Flat(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit count for layer normalization: channels for spatial tensors,
    /// the full length for flat ones.
    pub fn units(&self) -> usize {
        match self {
            TensorShape::Spatial(s) => s.channels,
            TensorShape::Flat(n) => *n,
        }
    }
}

pub fn conv_out_len(d: usize, k: usize, s: usize, pad: Padding) -> usize {
    match pad {
        Padding::Valid => (d - k) / s + 1,
        Padding::Same => d.div_ceil(s),
    }
}

pub fn pad_begin(d: usize, k: usize, s: usize, out: usize) -> usize {
    ((out - 1) * s + k).saturating_sub(d) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub name: String,
    pub input_shape: (usize, usize, usize),
    pub layers: Vec<LayerSpec>,
}

impl ArchitectureSpec {
    /// Checks structural invariants and returns every layer's output shape.
    pub fn validate(&self) -> Result<Vec<TensorShape>, NeuralError> {
        let bad = |index: usize, kind: &str, reason: String| NeuralError::BadLayer {
            index,
            kind: kind.to_string(),
            reason,
        };
        if self.layers.is_empty() {
            return Err(NeuralError::MissingOutput);
        }
        let mut shape = TensorShape::Spatial(SpatialShape {
            channels: 1,
            dims: self.input_shape,
        });
        if shape.len() == 0 {
            return Err(bad(0, "input", "input shape has a zero axis".to_string()));
        }
        let mut shapes = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::Conv3d {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    let s = spatial(&shape).ok_or_else(|| {
                        bad(i, "conv3d", "requires a spatial input".to_string())
                    })?;
                    if *out_channels == 0 || *kernel == 0 || *stride == 0 {
                        return Err(bad(i, "conv3d", "zero size parameter".to_string()));
                    }
                    let dims = [s.dims.0, s.dims.1, s.dims.2];
                    if *padding == Padding::Valid && dims.iter().any(|&d| d < *kernel) {
                        return Err(bad(
                            i,
                            "conv3d",
                            format!("kernel {kernel} exceeds input dims {dims:?}"),
                        ));
                    }
                    shape = TensorShape::Spatial(SpatialShape {
                        channels: *out_channels,
                        dims: (
                            conv_out_len(s.dims.0, *kernel, *stride, *padding),
                            conv_out_len(s.dims.1, *kernel, *stride, *padding),
                            conv_out_len(s.dims.2, *kernel, *stride, *padding),
                        ),
                    });
                }
                LayerSpec::MaxPool3d {
                    window,
                    stride,
                    padding,
                } => {
                    let s = spatial(&shape).ok_or_else(|| {
                        bad(i, "maxpool3d", "requires a spatial input".to_string())
                    })?;
                    if *window == 0 || *stride == 0 {
                        return Err(bad(i, "maxpool3d", "zero size parameter".to_string()));
                    }
                    let dims = [s.dims.0, s.dims.1, s.dims.2];
                    if *padding == Padding::Valid && dims.iter().any(|&d| d < *window) {
                        return Err(bad(
                            i,
                            "maxpool3d",
                            format!("window {window} exceeds input dims {dims:?}"),
                        ));
                    }
                    shape = TensorShape::Spatial(SpatialShape {
                        channels: s.channels,
                        dims: (
                            conv_out_len(s.dims.0, *window, *stride, *padding),
                            conv_out_len(s.dims.1, *window, *stride, *padding),
                            conv_out_len(s.dims.2, *window, *stride, *padding),
                        ),
                    });
                }
                LayerSpec::MultiCrop => {
                    let s = spatial(&shape).ok_or_else(|| {
                        bad(i, "multicrop", "requires a spatial input".to_string())
                    })?;
                    let dims = [s.dims.0, s.dims.1, s.dims.2];
                    if dims.iter().any(|&d| d < 4) {
                        return Err(bad(
                            i,
                            "multicrop",
                            format!("spatial dims {dims:?} must all be >= 4"),
                        ));
                    }
                    let t = |d: usize| d.div_ceil(2).div_ceil(2);
                    shape = TensorShape::Spatial(SpatialShape {
                        channels: 3 * s.channels,
                        dims: (t(s.dims.0), t(s.dims.1), t(s.dims.2)),
                    });
                }
                LayerSpec::Dense { units } => {
                    if *units == 0 {
                        return Err(bad(i, "dense", "zero units".to_string()));
                    }
                    shape = TensorShape::Flat(*units);
                }
                LayerSpec::LayerNormRelu => {
                    if shape.len() < 2 {
                        return Err(bad(
                            i,
                            "layer_norm_relu",
                            "needs at least 2 values to normalize".to_string(),
                        ));
                    }
                }
                LayerSpec::Dropout { keep_prob } => {
                    if !(*keep_prob > 0.0 && *keep_prob <= 1.0) {
                        return Err(bad(
                            i,
                            "dropout",
                            format!("keep_prob {keep_prob} outside (0, 1]"),
                        ));
                    }
                }
                LayerSpec::Output { units } => {
                    if *units != 2 {
                        return Err(bad(
                            i,
                            "output",
                            format!("binary classification requires 2 units, got {units}"),
                        ));
                    }
                    if i + 1 != self.layers.len() {
                        return Err(bad(i, "output", "must be the last layer".to_string()));
                    }
                    shape = TensorShape::Flat(*units);
                }
            }
            if shape.len() == 0 {
                return Err(bad(i, "shape", "layer output collapsed to zero".to_string()));
            }
            shapes.push(shape);
        }
        if !matches!(self.layers.last(), Some(LayerSpec::Output { .. })) {
            return Err(NeuralError::MissingOutput);
        }
        Ok(shapes)
    }

    /// Total learned parameter count (weights, biases, gamma/beta).
    pub fn param_count(&self) -> Result<u64, NeuralError> {
        let shapes = self.validate()?;
        let mut count = 0u64;
        let mut prev_len = (self.input_shape.0 * self.input_shape.1 * self.input_shape.2) as u64;
        let mut prev_units = 1u64;
        for (layer, shape) in self.layers.iter().zip(&shapes) {
            match layer {
                LayerSpec::Conv3d {
                    out_channels,
                    kernel,
                    ..
                } => {
                    let k3 = (*kernel as u64).pow(3);
                    count += k3 * prev_units * *out_channels as u64;
                }
                LayerSpec::Dense { units } => {
                    count += prev_len * *units as u64;
                }
                LayerSpec::Output { units } => {
                    count += prev_len * *units as u64 + *units as u64;
                }
                LayerSpec::LayerNormRelu => {
                    count += 2 * prev_units;
                }
                _ => {}
            }
            prev_len = shape.len() as u64;
            prev_units = shape.units() as u64;
        }
        Ok(count)
    }

    /// Index of the final hidden dense layer's activation (after its layer
    /// norm when present): the FFL feature tap.
    pub fn ffl_layer_index(&self) -> Result<usize, NeuralError> {
        let dense_idx = self
            .layers
            .iter()
            .rposition(|l| matches!(l, LayerSpec::Dense { .. }))
            .ok_or(NeuralError::NoHiddenDense)?;
        if matches!(self.layers.get(dense_idx + 1), Some(LayerSpec::LayerNormRelu)) {
            Ok(dense_idx + 1)
        } else {
            Ok(dense_idx)
        }
    }
}

fn spatial(shape: &TensorShape) -> Option<SpatialShape> {
    match shape {
        TensorShape::Spatial(s) => Some(*s),
        TensorShape::Flat(_) => None,
    }
}

pub const PRESET_NAMES: [&str; 6] = [
    "alexnet3d",
    "vgg16_3d",
    "multicrop3d",
    "alexnet3d_toy",
    "vgg16_3d_toy",
    "multicrop3d_toy",
];

/// Builds a named preset for the given input shape. The full presets
/// mirror the three reference architectures (their published intermediate
/// shapes hold at input 105x97x129); the `*_toy` variants keep the layer
/// topology with shrunken channels, kernels and unit counts for desk-scale
/// runs.
pub fn preset(
    name: &str,
    input_shape: (usize, usize, usize),
) -> Result<ArchitectureSpec, NeuralError> {
    use LayerSpec::*;
    let conv = |c, k, s| Conv3d {
        out_channels: c,
        kernel: k,
        stride: s,
        padding: Padding::Same,
    };
    let pool = |w, s| MaxPool3d {
        window: w,
        stride: s,
        padding: Padding::Same,
    };
    let drop = || Dropout { keep_prob: 0.9 };

    let layers = match name {
        "alexnet3d" => vec![
            conv(96, 11, 4),
            LayerNormRelu,
            pool(3, 2),
            conv(256, 5, 1),
            LayerNormRelu,
            pool(3, 2),
            conv(384, 3, 1),
            LayerNormRelu,
            conv(384, 3, 1),
            LayerNormRelu,
            conv(256, 3, 1),
            LayerNormRelu,
            pool(3, 2),
            Dense { units: 4096 },
            LayerNormRelu,
            drop(),
            Dense { units: 4096 },
            LayerNormRelu,
            drop(),
            Output { units: 2 },
        ],
        "vgg16_3d" => {
            let mut v = vec![conv(64, 11, 4), LayerNormRelu, conv(64, 3, 1), LayerNormRelu, pool(2, 2)];
            for &(reps, ch) in &[(2usize, 128usize), (3, 256), (3, 512), (3, 512)] {
                for _ in 0..reps {
                    v.push(conv(ch, 3, 1));
                    v.push(LayerNormRelu);
                }
                v.push(pool(2, 2));
            }
            v.extend([
                Dense { units: 4096 },
                LayerNormRelu,
                drop(),
                Dense { units: 4096 },
                LayerNormRelu,
                drop(),
                Output { units: 2 },
            ]);
            v
        }
        "multicrop3d" => vec![
            conv(64, 11, 4),
            LayerNormRelu,
            MultiCrop,
            conv(64, 3, 1),
            LayerNormRelu,
            pool(2, 2),
            conv(64, 3, 1),
            LayerNormRelu,
            pool(2, 2),
            Dense { units: 32 },
            LayerNormRelu,
            drop(),
            Output { units: 2 },
        ],
        "alexnet3d_toy" => vec![
            conv(8, 5, 2),
            LayerNormRelu,
            pool(3, 2),
            conv(16, 3, 1),
            LayerNormRelu,
            pool(3, 2),
            conv(16, 3, 1),
            LayerNormRelu,
            conv(16, 3, 1),
            LayerNormRelu,
            conv(8, 3, 1),
            LayerNormRelu,
            pool(3, 2),
            Dense { units: 32 },
            LayerNormRelu,
            drop(),
            Dense { units: 32 },
            LayerNormRelu,
            drop(),
            Output { units: 2 },
        ],
        "vgg16_3d_toy" => {
            let mut v = vec![conv(8, 5, 2), LayerNormRelu, conv(8, 3, 1), LayerNormRelu, pool(2, 2)];
            for &(reps, ch) in &[(2usize, 12usize), (3, 16), (3, 16), (3, 16)] {
                for _ in 0..reps {
                    v.push(conv(ch, 3, 1));
                    v.push(LayerNormRelu);
                }
                v.push(pool(2, 2));
            }
            v.extend([
                Dense { units: 32 },
                LayerNormRelu,
                drop(),
                Dense { units: 32 },
                LayerNormRelu,
                drop(),
                Output { units: 2 },
            ]);
            v
        }
        "multicrop3d_toy" => vec![
            conv(8, 5, 2),
            LayerNormRelu,
            MultiCrop,
            conv(8, 3, 1),
            LayerNormRelu,
            pool(2, 2),
            conv(8, 3, 1),
            LayerNormRelu,
            pool(2, 2),
            Dense { units: 16 },
            LayerNormRelu,
            drop(),
            Output { units: 2 },
        ],
        other => {
            return Err(NeuralError::UnknownPreset(
                other.to_string(),
                PRESET_NAMES.join(", "),
            ))
        }
    };
    let spec = ArchitectureSpec {
        name: name.to_string(),
        input_shape,
        layers,
    };
    spec.validate()?;
    Ok(spec)
}
