//! Network instantiation, forward/backward orchestration and feature taps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::arch::{ArchitectureSpec, LayerSpec, TensorShape};
use super::layers::{
    conv3d_backward, conv3d_forward, dense_backward, dense_forward, dropout_mask,
    maxpool_backward, maxpool_forward, multicrop_backward, multicrop_forward, norm_backward,
    norm_forward, ConvGeometry, MultiCropCache, MultiCropGeometry, NormCache, PoolGeometry,
    SpatialShape,
};
use super::NeuralError;

/// Scalar type of the engine: f32 for training/inference, f64 for gradient
/// checking.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Send + Sync + std::fmt::Debug + 'static
{
}
impl Scalar for f32 {}
impl Scalar for f64 {}

enum LayerState<T> {
    Conv3d {
        geom: ConvGeometry,
        w: Vec<T>,
        gw: Vec<T>,
        cache_x: Vec<T>,
    },
    MaxPool3d {
        geom: PoolGeometry,
        argmax: Vec<u32>,
    },
    MultiCrop {
        geom: MultiCropGeometry,
        cache: Option<MultiCropCache>,
    },
    Dense {
        units: usize,
        w: Vec<T>,
        gw: Vec<T>,
        cache_x: Vec<T>,
    },
    LayerNormRelu {
        positions: usize,
        gamma: Vec<T>,
        beta: Vec<T>,
        ggamma: Vec<T>,
        gbeta: Vec<T>,
        cache: Option<NormCache<T>>,
    },
    Dropout {
        keep: f64,
        mask: Vec<T>,
    },
    Output {
        units: usize,
        w: Vec<T>,
        b: Vec<T>,
        gw: Vec<T>,
        gb: Vec<T>,
        cache_x: Vec<T>,
    },
}

/// The two pre-softmax logits of the output layer. `feature_p` is the
/// logit tied to the positive (malignant) class probability, `feature_n`
/// the negative one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputFeatures {
    pub feature_n: f64,
    pub feature_p: f64,
}

pub struct Network<T> {
    spec: ArchitectureSpec,
    shapes: Vec<TensorShape>,
    layers: Vec<LayerState<T>>,
    input_len: usize,
    ffl_index: Option<usize>,
}

fn sc<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 converts to scalar")
}

impl<T: Scalar> Network<T> {
    /// Instantiates a validated architecture with He-uniform weights
    /// (seeded) and gamma = 1, beta = 0.
    pub fn new(spec: ArchitectureSpec, seed: u64) -> Result<Self, NeuralError> {
        let shapes = spec.validate()?;
        let input_len = spec.input_shape.0 * spec.input_shape.1 * spec.input_shape.2;
        let mut rng = crate::seed::rng(seed, "init", &[]);
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut prev_shape = TensorShape::Spatial(SpatialShape {
            channels: 1,
            dims: spec.input_shape,
        });
        for (i, layer) in spec.layers.iter().enumerate() {
            let state = match layer {
                LayerSpec::Conv3d {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    let in_shape = match prev_shape {
                        TensorShape::Spatial(s) => s,
                        TensorShape::Flat(_) => unreachable!("validated"),
                    };
                    let geom =
                        ConvGeometry::new(in_shape, *out_channels, *kernel, *stride, *padding);
                    let fan_in = in_shape.channels * kernel.pow(3);
                    let w = he_uniform(geom.weight_len(), fan_in, &mut rng);
                    let gw = vec![T::zero(); w.len()];
                    LayerState::Conv3d {
                        geom,
                        w,
                        gw,
                        cache_x: Vec::new(),
                    }
                }
                LayerSpec::MaxPool3d {
                    window,
                    stride,
                    padding,
                } => {
                    let in_shape = match prev_shape {
                        TensorShape::Spatial(s) => s,
                        TensorShape::Flat(_) => unreachable!("validated"),
                    };
                    LayerState::MaxPool3d {
                        geom: PoolGeometry::new(in_shape, *window, *stride, *padding),
                        argmax: Vec::new(),
                    }
                }
                LayerSpec::MultiCrop => {
                    let in_shape = match prev_shape {
                        TensorShape::Spatial(s) => s,
                        TensorShape::Flat(_) => unreachable!("validated"),
                    };
                    LayerState::MultiCrop {
                        geom: MultiCropGeometry::new(in_shape),
                        cache: None,
                    }
                }
                LayerSpec::Dense { units } => {
                    let in_len = prev_shape.len();
                    let w = he_uniform(in_len * units, in_len, &mut rng);
                    let gw = vec![T::zero(); w.len()];
                    LayerState::Dense {
                        units: *units,
                        w,
                        gw,
                        cache_x: Vec::new(),
                    }
                }
                LayerSpec::LayerNormRelu => {
                    let units = prev_shape.units();
                    let positions = prev_shape.len() / units;
                    LayerState::LayerNormRelu {
                        positions,
                        gamma: vec![T::one(); units],
                        beta: vec![T::zero(); units],
                        ggamma: vec![T::zero(); units],
                        gbeta: vec![T::zero(); units],
                        cache: None,
                    }
                }
                LayerSpec::Dropout { keep_prob } => LayerState::Dropout {
                    keep: *keep_prob,
                    mask: Vec::new(),
                },
                LayerSpec::Output { units } => {
                    let in_len = prev_shape.len();
                    let w = he_uniform(in_len * units, in_len, &mut rng);
                    let gw = vec![T::zero(); w.len()];
                    LayerState::Output {
                        units: *units,
                        w,
                        b: vec![T::zero(); *units],
                        gw,
                        gb: vec![T::zero(); *units],
                        cache_x: Vec::new(),
                    }
                }
            };
            layers.push(state);
            prev_shape = shapes[i];
        }
        let ffl_index = spec.ffl_layer_index().ok();
        Ok(Network {
            spec,
            shapes,
            layers,
            input_len,
            ffl_index,
        })
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    fn check_input(&self, x: &[T]) -> Result<(), NeuralError> {
        if x.len() != self.input_len {
            return Err(NeuralError::InputLenMismatch {
                got: x.len(),
                want: self.input_len,
            });
        }
        Ok(())
    }

    /// Training-mode forward pass for one sample; caches everything needed
    /// by [`Self::backward`]. Dropout draws from `rng`.
    pub fn forward_train(&mut self, x: &[T], rng: &mut ChaCha8Rng) -> Result<Vec<T>, NeuralError> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for layer in &mut self.layers {
            cur = match layer {
                LayerState::Conv3d {
                    geom, w, cache_x, ..
                } => {
                    *cache_x = cur.clone();
                    conv3d_forward(geom, &cur, w)
                }
                LayerState::MaxPool3d { geom, argmax } => {
                    let (out, arg) = maxpool_forward(geom, &cur);
                    *argmax = arg;
                    out
                }
                LayerState::MultiCrop { geom, cache } => {
                    let (out, c) = multicrop_forward(geom, &cur);
                    *cache = Some(c);
                    out
                }
                LayerState::Dense {
                    units, w, cache_x, ..
                } => {
                    *cache_x = cur.clone();
                    dense_forward(&cur, w, *units)
                }
                LayerState::LayerNormRelu {
                    positions,
                    gamma,
                    beta,
                    cache,
                    ..
                } => {
                    let (out, c) = norm_forward(&cur, gamma, beta, *positions);
                    *cache = Some(c);
                    out
                }
                LayerState::Dropout { keep, mask } => {
                    *mask = dropout_mask(cur.len(), *keep, rng);
                    cur.iter().zip(mask.iter()).map(|(&v, &m)| v * m).collect()
                }
                LayerState::Output {
                    units,
                    w,
                    b,
                    cache_x,
                    ..
                } => {
                    *cache_x = cur.clone();
                    let mut out = dense_forward(&cur, w, *units);
                    for (o, &bi) in out.iter_mut().zip(b.iter()) {
                        *o = *o + bi;
                    }
                    out
                }
            };
        }
        Ok(cur)
    }

    /// Backpropagates the loss gradient on the logits, accumulating
    /// parameter gradients; returns the gradient with respect to the
    /// input. Must follow a `forward_train` on the same sample.
    pub fn backward(&mut self, dlogits: &[T]) -> Vec<T> {
        let mut grad = dlogits.to_vec();
        for layer in self.layers.iter_mut().rev() {
            grad = match layer {
                LayerState::Conv3d {
                    geom,
                    w,
                    gw,
                    cache_x,
                } => conv3d_backward(geom, cache_x, w, &grad, gw),
                LayerState::MaxPool3d { geom, argmax } => {
                    maxpool_backward(&grad, argmax, geom.in_shape.len())
                }
                LayerState::MultiCrop { geom, cache } => {
                    multicrop_backward(geom, cache.as_ref().expect("forward before backward"), &grad)
                }
                LayerState::Dense {
                    units,
                    w,
                    gw,
                    cache_x,
                    ..
                } => dense_backward(cache_x, w, *units, &grad, gw),
                LayerState::LayerNormRelu {
                    positions,
                    gamma,
                    ggamma,
                    gbeta,
                    cache,
                    ..
                } => norm_backward(
                    cache.as_ref().expect("forward before backward"),
                    gamma,
                    *positions,
                    &grad,
                    ggamma,
                    gbeta,
                ),
                LayerState::Dropout { mask, .. } => grad
                    .iter()
                    .zip(mask.iter())
                    .map(|(&g, &m)| g * m)
                    .collect(),
                LayerState::Output {
                    units,
                    w,
                    gw,
                    gb,
                    cache_x,
                    ..
                } => {
                    for (gbi, &g) in gb.iter_mut().zip(grad.iter()) {
                        *gbi = *gbi + g;
                    }
                    dense_backward(cache_x, w, *units, &grad, gw)
                }
            };
        }
        grad
    }

    /// Inference-mode forward pass (dropout is identity); returns the
    /// logits and the FFL activation when the architecture has one.
    pub fn forward_eval(&self, x: &[T]) -> Result<(Vec<T>, Option<Vec<T>>), NeuralError> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut ffl = None;
        for (i, layer) in self.layers.iter().enumerate() {
            cur = match layer {
                LayerState::Conv3d { geom, w, .. } => conv3d_forward(geom, &cur, w),
                LayerState::MaxPool3d { geom, .. } => maxpool_forward(geom, &cur).0,
                LayerState::MultiCrop { geom, .. } => multicrop_forward(geom, &cur).0,
                LayerState::Dense { units, w, .. } => dense_forward(&cur, w, *units),
                LayerState::LayerNormRelu {
                    positions,
                    gamma,
                    beta,
                    ..
                } => norm_forward(&cur, gamma, beta, *positions).0,
                LayerState::Dropout { .. } => cur,
                LayerState::Output { units, w, b, .. } => {
                    let mut out = dense_forward(&cur, w, *units);
                    for (o, &bi) in out.iter_mut().zip(b.iter()) {
                        *o = *o + bi;
                    }
                    out
                }
            };
            if self.ffl_index == Some(i) {
                ffl = Some(cur.clone());
            }
        }
        Ok((cur, ffl))
    }

    /// The two pre-softmax logits as named output features.
    pub fn output_features(&self, x: &[T]) -> Result<OutputFeatures, NeuralError> {
        let (logits, _) = self.forward_eval(x)?;
        Ok(OutputFeatures {
            feature_n: logits[0].to_f64().unwrap(),
            feature_p: logits[1].to_f64().unwrap(),
        })
    }

    /// Post-activation vector of the final hidden dense layer.
    pub fn ffl_features(&self, x: &[T]) -> Result<Vec<T>, NeuralError> {
        if self.ffl_index.is_none() {
            return Err(NeuralError::NoHiddenDense);
        }
        let (_, ffl) = self.forward_eval(x)?;
        ffl.ok_or(NeuralError::NoHiddenDense)
    }

    /// Width of the FFL feature vector.
    pub fn ffl_len(&self) -> Result<usize, NeuralError> {
        let idx = self.spec.ffl_layer_index()?;
        Ok(self.shapes[idx].len())
    }

    pub fn zero_grads(&mut self) {
        for layer in &mut self.layers {
            match layer {
                LayerState::Conv3d { gw, .. } | LayerState::Dense { gw, .. } => {
                    gw.iter_mut().for_each(|g| *g = T::zero())
                }
                LayerState::LayerNormRelu { ggamma, gbeta, .. } => {
                    ggamma.iter_mut().for_each(|g| *g = T::zero());
                    gbeta.iter_mut().for_each(|g| *g = T::zero());
                }
                LayerState::Output { gw, gb, .. } => {
                    gw.iter_mut().for_each(|g| *g = T::zero());
                    gb.iter_mut().for_each(|g| *g = T::zero());
                }
                _ => {}
            }
        }
    }

    /// All parameters concatenated in declaration order (per layer: conv w;
    /// dense w; layer-norm gamma then beta; output w then b).
    pub fn flat_params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            match layer {
                LayerState::Conv3d { w, .. } | LayerState::Dense { w, .. } => {
                    out.extend_from_slice(w)
                }
                LayerState::LayerNormRelu { gamma, beta, .. } => {
                    out.extend_from_slice(gamma);
                    out.extend_from_slice(beta);
                }
                LayerState::Output { w, b, .. } => {
                    out.extend_from_slice(w);
                    out.extend_from_slice(b);
                }
                _ => {}
            }
        }
        out
    }

    pub fn flat_grads(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            match layer {
                LayerState::Conv3d { gw, .. } | LayerState::Dense { gw, .. } => {
                    out.extend_from_slice(gw)
                }
                LayerState::LayerNormRelu { ggamma, gbeta, .. } => {
                    out.extend_from_slice(ggamma);
                    out.extend_from_slice(gbeta);
                }
                LayerState::Output { gw, gb, .. } => {
                    out.extend_from_slice(gw);
                    out.extend_from_slice(gb);
                }
                _ => {}
            }
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[T]) -> Result<(), NeuralError> {
        if params.len() != self.n_params() {
            return Err(NeuralError::ParamLenMismatch {
                got: params.len(),
                want: self.n_params(),
            });
        }
        fn take<T: Copy>(buf: &mut [T], params: &[T], off: &mut usize) {
            buf.copy_from_slice(&params[*off..*off + buf.len()]);
            *off += buf.len();
        }
        let mut off = 0;
        for layer in &mut self.layers {
            match layer {
                LayerState::Conv3d { w, .. } | LayerState::Dense { w, .. } => {
                    take(w, params, &mut off)
                }
                LayerState::LayerNormRelu { gamma, beta, .. } => {
                    take(gamma, params, &mut off);
                    take(beta, params, &mut off);
                }
                LayerState::Output { w, b, .. } => {
                    take(w, params, &mut off);
                    take(b, params, &mut off);
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.spec.param_count().expect("spec validated at build") as usize
    }

    /// Zeroes the output layer's weights and bias (the logits of any input
    /// become (0, 0)). Useful as a fixed point for tests.
    pub fn zero_output_layer(&mut self) {
        for layer in &mut self.layers {
            if let LayerState::Output { w, b, .. } = layer {
                w.iter_mut().for_each(|v| *v = T::zero());
                b.iter_mut().for_each(|v| *v = T::zero());
            }
        }
    }
}

fn he_uniform<T: Scalar>(len: usize, fan_in: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let limit = (6.0 / fan_in as f64).sqrt();
    (0..len)
        .map(|_| sc::<T>(rng.gen_range(-limit..limit)))
        .collect()
}
