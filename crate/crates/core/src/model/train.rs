use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, Classifier};
use crate::dataset::{SplitDataset, WindowTensor};
use crate::error::{Error, Result};

/// Plain mini-batch gradient descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 50, lr: 1e-3, batch_size: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    /// Running accuracy over the epoch's mini-batches (pre-update predictions).
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

pub(crate) fn accuracy<M: Classifier>(model: &M, windows: &[WindowTensor]) -> Result<f64> {
    if windows.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for w in windows {
        if argmax(&model.logits(w.data.view())?) == w.label.index() {
            hits += 1;
        }
    }
    Ok(hits as f64 / windows.len() as f64)
}

/// Trains `model` in place of a fresh copy and returns it with per-epoch
/// history. Validation accuracy is measured on the test split. Single
/// threaded and bitwise reproducible for a fixed seed.
pub fn train<M: Classifier>(mut model: M, data: &SplitDataset, cfg: &TrainConfig) -> Result<(M, Vec<EpochStats>)> {
    if data.train.is_empty() {
        return Err(Error::Empty("training split"));
    }
    if cfg.batch_size == 0 || !cfg.lr.is_finite() || cfg.lr < 0.0 {
        return Err(Error::Config("batch_size must be positive and lr finite and non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut hits) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = model.zeros_like();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let w = &data.train[i];
                let (loss, logits) = model.accumulate_gradient(w.data.view(), w.label, &mut grad, scale)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, loss });
                }
                loss_sum += loss;
                hits += usize::from(argmax(&logits) == w.label.index());
            }
            for ((_, mut p), (_, g)) in model.tensors_mut().into_iter().zip(grad.tensors()) {
                p.scaled_add(-cfg.lr, &g);
            }
        }
        let n = data.train.len() as f64;
        let train_loss = loss_sum / n;
        if !train_loss.is_finite() || model.tensors().iter().any(|(_, t)| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged { epoch, loss: train_loss });
        }
        let stats = EpochStats {
            epoch,
            train_loss,
            train_accuracy: hits as f64 / n,
            val_accuracy: accuracy(&model, &data.test)?,
        };
        info!(
            "epoch {epoch:3}: loss {:.4} train acc {:.3} val acc {:.3}",
            stats.train_loss, stats.train_accuracy, stats.val_accuracy
        );
        history.push(stats);
    }
    Ok((model, history))
}
