//! The training procedure: Adam over shuffled class-balanced batches with
//! a staged learning rate, stopping at a loss threshold or an epoch cap.

use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamParams};
use super::arch::ArchitectureSpec;
use super::loss::{log_probs, softmax};
use super::network::Network;
use super::NeuralError;
use crate::ingest::NoduleTensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrStage {
    /// First epoch (1-based) at which this rate applies.
    pub start_epoch: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Samples per batch; each batch holds equal class counts, so the
    /// effective size is rounded down to even.
    pub batch_size: usize,
    pub lr_schedule: Vec<LrStage>,
    /// Stop once the epoch loss reaches this value...
    pub stop_loss: f64,
    /// ...or this many epochs have run.
    pub max_epochs: u32,
    /// When set, overrides the keep probability of every dropout layer.
    pub keep_prob: Option<f64>,
    pub adam: AdamParams,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 70,
            lr_schedule: vec![
                LrStage { start_epoch: 1, rate: 0.005 },
                LrStage { start_epoch: 2, rate: 0.001 },
                LrStage { start_epoch: 5, rate: 0.0005 },
                LrStage { start_epoch: 9, rate: 1e-4 },
            ],
            stop_loss: 0.01,
            max_epochs: 100,
            keep_prob: None,
            adam: AdamParams::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.batch_size < 2 {
            return Err(NeuralError::BadConfig(format!(
                "batch_size {} < 2 (balanced batches need one sample per class)",
                self.batch_size
            )));
        }
        if self.lr_schedule.is_empty() {
            return Err(NeuralError::BadConfig("empty lr schedule".to_string()));
        }
        if self.lr_schedule.iter().any(|s| !(s.rate > 0.0 && s.rate.is_finite())) {
            return Err(NeuralError::BadConfig("rates must be positive".to_string()));
        }
        if self.lr_schedule[0].start_epoch > 1 {
            return Err(NeuralError::BadConfig(
                "lr schedule must cover epoch 1".to_string(),
            ));
        }
        if !(self.stop_loss > 0.0) {
            return Err(NeuralError::BadConfig("stop_loss must be > 0".to_string()));
        }
        if self.max_epochs == 0 {
            return Err(NeuralError::BadConfig("max_epochs must be >= 1".to_string()));
        }
        if let Some(k) = self.keep_prob {
            if !(k > 0.0 && k <= 1.0) {
                return Err(NeuralError::BadConfig(format!(
                    "keep_prob {k} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn rate_for(&self, epoch: u32) -> f64 {
        let mut rate = self.lr_schedule[0].rate;
        for stage in &self.lr_schedule {
            if stage.start_epoch <= epoch {
                rate = stage.rate;
            }
        }
        rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStat {
    pub epoch: u32,
    pub loss: f64,
    pub lr: f64,
}

pub struct TrainedNetwork {
    pub network: Network<f32>,
    pub log: Vec<EpochStat>,
}

impl std::fmt::Debug for TrainedNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrainedNetwork")
            .field("arch", &self.network.spec().name)
            .field("epochs", &self.log.len())
            .finish()
    }
}

/// Trains `spec` on the labeled tensors by minimizing the batch
/// cross-entropy with Adam.
///
/// Each epoch pairs every minority-class tensor with a freshly subsampled
/// majority tensor (seeded), shuffles the pairs and emits balanced batches,
/// so every batch holds equal class counts. Stops when the epoch loss
/// reaches `stop_loss` or at `max_epochs`. A non-finite loss aborts with
/// the last finite checkpoint retained in the error.
pub fn train(
    spec: &ArchitectureSpec,
    tensors: &[NoduleTensor],
    cfg: &TrainConfig,
) -> Result<TrainedNetwork, NeuralError> {
    cfg.validate()?;
    let shapes = spec.validate()?;
    let _ = shapes;
    for t in tensors {
        if t.shape != spec.input_shape {
            return Err(NeuralError::TensorShapeMismatch {
                id: t.nodule_id.clone(),
                got: t.shape,
                want: spec.input_shape,
            });
        }
    }
    let pos: Vec<usize> = (0..tensors.len()).filter(|&i| tensors[i].label == 1).collect();
    let neg: Vec<usize> = (0..tensors.len()).filter(|&i| tensors[i].label == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(NeuralError::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };

    let mut spec = spec.clone();
    if let Some(keep) = cfg.keep_prob {
        for layer in &mut spec.layers {
            if let super::arch::LayerSpec::Dropout { keep_prob } = layer {
                *keep_prob = keep;
            }
        }
        spec.validate()?;
    }

    let mut net: Network<f32> =
        Network::new(spec, crate::seed::derive(cfg.seed, "net-init", &[]))?;
    let mut adam = Adam::<f32>::new(net.n_params(), cfg.adam);
    let mut log = Vec::new();
    let mut checkpoint = net.flat_params();
    let pairs_per_batch = (cfg.batch_size / 2).max(1);

    for epoch in 1..=cfg.max_epochs {
        let lr = cfg.rate_for(epoch);
        let mut rng = crate::seed::rng(cfg.seed, "epoch", &[u64::from(epoch)]);
        let mut dropout_rng = crate::seed::rng(cfg.seed, "dropout", &[u64::from(epoch)]);
        let batches = balanced_batches(&minority, &majority, pairs_per_batch, &mut rng);

        let mut loss_sum = 0.0f64;
        let mut sample_count = 0usize;
        for batch in &batches {
            net.zero_grads();
            let n = batch.len();
            for &idx in batch {
                let t = &tensors[idx];
                let logits = net.forward_train(&t.values, &mut dropout_rng)?;
                let (y0, y1) = (logits[0], logits[1]);
                // Per-sample gradient of the batch-mean loss:
                // (softmax - onehot) / n.
                let (p0, p1) = softmax(y0, y1);
                let (t0, t1) = if t.label == 1 {
                    (0.0f32, 1.0f32)
                } else {
                    (1.0f32, 0.0f32)
                };
                let scale = 1.0 / n as f32;
                net.backward(&[(p0 - t0) * scale, (p1 - t1) * scale]);
                let (lp0, lp1) = log_probs(y0 as f64, y1 as f64);
                loss_sum -= if t.label == 1 { lp1 } else { lp0 };
            }
            sample_count += n;
            let mut theta = net.flat_params();
            let grads = net.flat_grads();
            adam.step(&mut theta, &grads, lr);
            net.set_flat_params(&theta)?;
        }
        let loss = loss_sum / sample_count as f64;
        log.push(EpochStat { epoch, loss, lr });
        if !loss.is_finite() {
            net.set_flat_params(&checkpoint)?;
            return Err(NeuralError::Diverged {
                epoch,
                checkpoint: Box::new(TrainedNetwork { network: net, log }),
            });
        }
        checkpoint = net.flat_params();
        if loss <= cfg.stop_loss {
            break;
        }
    }
    Ok(TrainedNetwork { network: net, log })
}

/// One epoch's balanced batches: every minority index paired with a
/// subsampled majority index, pairs shuffled and chunked, so each batch
/// holds equal class counts.
pub(crate) fn balanced_batches(
    minority: &[usize],
    majority: &[usize],
    pairs_per_batch: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut maj = majority.to_vec();
    maj.shuffle(rng);
    maj.truncate(minority.len());
    let mut min = minority.to_vec();
    min.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = min.into_iter().zip(maj).collect();
    pairs.shuffle(rng);
    pairs
        .chunks(pairs_per_batch)
        .map(|chunk| chunk.iter().flat_map(|&(a, b)| [a, b]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::AugmentationTag;
    use crate::neural::arch::preset;

    fn synthetic_tensors(n: usize, side: usize, seed: u64) -> Vec<NoduleTensor> {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed, "synthetic", &[]);
        (0..n)
            .map(|i| {
                let label = u8::from(i % 2 == 1);
                // Two blobs distinguishable by intensity scale and extent.
                let len = side * side * side;
                let mut values = vec![0.0f32; len];
                let r = if label == 1 { side as f64 * 0.35 } else { side as f64 * 0.2 };
                let amp = if label == 1 { 1.0 } else { 0.5 };
                let c = side as f64 / 2.0;
                for z in 0..side {
                    for y in 0..side {
                        for x in 0..side {
                            let d = ((x as f64 - c).powi(2)
                                + (y as f64 - c).powi(2)
                                + (z as f64 - c).powi(2))
                            .sqrt();
                            if d < r {
                                values[x + side * (y + side * z)] =
                                    (amp + rng.gen_range(-0.1..0.1)) as f32;
                            }
                        }
                    }
                }
                NoduleTensor {
                    shape: (side, side, side),
                    values,
                    label,
                    nodule_id: format!("syn{i}"),
                    tag: AugmentationTag::Identity,
                }
            })
            .collect()
    }

    fn overfit_config(seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: 10,
            lr_schedule: vec![LrStage { start_epoch: 1, rate: 0.005 }],
            stop_loss: 0.01,
            max_epochs: 200,
            keep_prob: None,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn overfits_twenty_toy_tensors() {
        let spec = preset("multicrop3d_toy", (16, 16, 16)).unwrap();
        let tensors = synthetic_tensors(20, 16, 42);
        let trained = train(&spec, &tensors, &overfit_config(7)).unwrap();
        let last = trained.log.last().unwrap();
        assert!(
            last.loss < 0.01,
            "expected loss < 0.01 after {} epochs, got {}",
            last.epoch,
            last.loss
        );
    }

    #[test]
    fn fixed_seed_runs_are_bit_identical() {
        let spec = preset("multicrop3d_toy", (16, 16, 16)).unwrap();
        let tensors = synthetic_tensors(8, 16, 9);
        let mut cfg = overfit_config(3);
        cfg.max_epochs = 3;
        cfg.stop_loss = 1e-12;
        let a = train(&spec, &tensors, &cfg).unwrap();
        let b = train(&spec, &tensors, &cfg).unwrap();
        assert_eq!(a.network.flat_params(), b.network.flat_params());
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn rejects_single_class() {
        let spec = preset("multicrop3d_toy", (16, 16, 16)).unwrap();
        let mut tensors = synthetic_tensors(6, 16, 1);
        for t in &mut tensors {
            t.label = 1;
        }
        assert!(matches!(
            train(&spec, &tensors, &overfit_config(1)),
            Err(NeuralError::SingleClass)
        ));
    }

    #[test]
    fn lr_schedule_lookup() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.rate_for(1), 0.005);
        assert_eq!(cfg.rate_for(2), 0.001);
        assert_eq!(cfg.rate_for(4), 0.001);
        assert_eq!(cfg.rate_for(5), 0.0005);
        assert_eq!(cfg.rate_for(8), 0.0005);
        assert_eq!(cfg.rate_for(9), 1e-4);
        assert_eq!(cfg.rate_for(99), 1e-4);
    }

    #[test]
    fn batches_are_class_balanced() {
        // 5 minority (indices 0..5) and 13 majority (5..18).
        let minority: Vec<usize> = (0..5).collect();
        let majority: Vec<usize> = (5..18).collect();
        let mut rng = crate::seed::rng(3, "epoch", &[1]);
        let batches = balanced_batches(&minority, &majority, 2, &mut rng);
        let total: usize = batches.iter().map(Vec::len).sum();
        assert_eq!(total, 10); // all minority used once, majority subsampled
        for batch in &batches {
            let n_min = batch.iter().filter(|&&i| i < 5).count();
            let n_maj = batch.len() - n_min;
            assert_eq!(n_min, n_maj, "batch {batch:?} is unbalanced");
        }
    }
}
