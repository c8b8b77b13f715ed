//! Classifiers: the focus-metric threshold baseline, a one-hidden-layer
//! feed-forward network and a single-block transformer encoder, with a
//! shared mini-batch gradient descent loop and evaluation report.

mod ffnn;
mod file;
mod metrics;
mod online;
mod study;
mod threshold;
mod train;
mod transformer;

use ndarray::{ArrayView2, ArrayViewD, ArrayViewMutD};

pub use ffnn::{Ffnn, FfnnConfig};
pub use file::{Model, ModelFile};
pub use metrics::{argmax, evaluate, ClassMetrics, EvalReport, MetricAverages};
pub use online::{OnlinePredictor, Prediction, PredictorEvent};
pub use study::{window_size_study, WindowSizeResult};
pub use threshold::{threshold_classify, threshold_sweep, SweepPoint, ThresholdConfig};
pub use train::{train, EpochStats, TrainConfig};
pub use transformer::{Transformer, TransformerConfig};

use crate::error::Result;
use crate::label::{ActionLabel, NUM_CLASSES};

/// A differentiable window classifier whose gradient has the same shape as
/// its parameters (the gradient is stored in a value of `Self`).
pub trait Classifier: Clone {
    fn logits(&self, window: ArrayView2<f64>) -> Result<[f64; NUM_CLASSES]>;

    /// Adds `scale * d(loss)/d(params)` for one window into `grad` and
    /// returns the unscaled loss and logits.
    fn accumulate_gradient(
        &self,
        window: ArrayView2<f64>,
        target: ActionLabel,
        grad: &mut Self,
        scale: f64,
    ) -> Result<(f64, [f64; NUM_CLASSES])>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self;

    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)>;

    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)>;

    fn predict(&self, window: ArrayView2<f64>) -> Result<ActionLabel> {
        Ok(ActionLabel::from_index(argmax(&self.logits(window)?)).unwrap())
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|z| (z - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Cross-entropy of `logits` against a one-hot target via log-sum-exp.
pub fn cross_entropy(logits: &[f64; NUM_CLASSES], target: ActionLabel) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    (lse - logits[target.index()]).max(0.0)
}

/// `softmax(logits) - one_hot(target)`, the loss gradient w.r.t. logits.
pub fn logit_gradient(logits: &[f64; NUM_CLASSES], target: ActionLabel) -> [f64; NUM_CLASSES] {
    let mut g = softmax(logits);
    g[target.index()] -= 1.0;
    g
}
