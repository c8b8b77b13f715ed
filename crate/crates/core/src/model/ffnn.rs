//! Feed-forward baseline: the flattened window through one GELU hidden
//! layer.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::transformer::{gelu, gelu_grad};
use super::{cross_entropy, logit_gradient, Classifier};
use crate::error::{Error, Result};
use crate::label::{ActionLabel, FEATURE_DIM, NUM_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfnnConfig {
    pub win_size: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for FfnnConfig {
    fn default() -> Self {
        Self { win_size: 80, hidden: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ffnn {
    pub cfg: FfnnConfig,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl Ffnn {
    pub fn new(cfg: FfnnConfig) -> Result<Self> {
        if cfg.win_size == 0 || cfg.hidden == 0 {
            return Err(Error::Config("ffnn win_size and hidden must be positive".into()));
        }
        let inputs = cfg.win_size * FEATURE_DIM;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let l1 = (6.0 / (inputs + cfg.hidden) as f64).sqrt();
        let l2 = (6.0 / (cfg.hidden + NUM_CLASSES) as f64).sqrt();
        Ok(Self {
            cfg,
            w1: Array2::from_shape_simple_fn((inputs, cfg.hidden), || rng.random_range(-l1..l1)),
            b1: Array1::zeros(cfg.hidden),
            w2: Array2::from_shape_simple_fn((cfg.hidden, NUM_CLASSES), || rng.random_range(-l2..l2)),
            b2: Array1::zeros(NUM_CLASSES),
        })
    }

    fn flatten(&self, window: &ArrayView2<f64>) -> Result<Array1<f64>> {
        if window.dim() != (self.cfg.win_size, FEATURE_DIM) {
            return Err(Error::dim(format!("{} x {FEATURE_DIM}", self.cfg.win_size), format!("{:?}", window.dim())));
        }
        Ok(window.iter().copied().collect())
    }
}

impl Classifier for Ffnn {
    fn logits(&self, window: ArrayView2<f64>) -> Result<[f64; NUM_CLASSES]> {
        let x = self.flatten(&window)?;
        let h = (x.dot(&self.w1) + &self.b1).mapv(gelu);
        let out = h.dot(&self.w2) + &self.b2;
        Ok([out[0], out[1], out[2]])
    }

    fn accumulate_gradient(
        &self,
        window: ArrayView2<f64>,
        target: ActionLabel,
        grad: &mut Self,
        scale: f64,
    ) -> Result<(f64, [f64; NUM_CLASSES])> {
        let x = self.flatten(&window)?;
        let pre = x.dot(&self.w1) + &self.b1;
        let h = pre.mapv(gelu);
        let out = h.dot(&self.w2) + &self.b2;
        let logits = [out[0], out[1], out[2]];
        let dout = Array1::from_iter(logit_gradient(&logits, target).iter().map(|g| g * scale));
        grad.b2 += &dout;
        grad.w2 += &h.view().insert_axis(Axis(1)).dot(&dout.view().insert_axis(Axis(0)));
        let dpre = self.w2.dot(&dout) * pre.mapv(gelu_grad);
        grad.b1 += &dpre;
        grad.w1 += &x.view().insert_axis(Axis(1)).dot(&dpre.view().insert_axis(Axis(0)));
        Ok((cross_entropy(&logits, target), logits))
    }

    fn zeros_like(&self) -> Self {
        Self {
            cfg: self.cfg,
            w1: Array2::zeros(self.w1.raw_dim()),
            b1: Array1::zeros(self.b1.raw_dim()),
            w2: Array2::zeros(self.w2.raw_dim()),
            b2: Array1::zeros(self.b2.raw_dim()),
        }
    }

    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)> {
        vec![
            ("w1", self.w1.view().into_dyn()),
            ("b1", self.b1.view().into_dyn()),
            ("w2", self.w2.view().into_dyn()),
            ("b2", self.b2.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)> {
        vec![
            ("w1", self.w1.view_mut().into_dyn()),
            ("b1", self.b1.view_mut().into_dyn()),
            ("w2", self.w2.view_mut().into_dyn()),
            ("b2", self.b2.view_mut().into_dyn()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = Ffnn::new(FfnnConfig { win_size: 3, hidden: 5, seed: 1 }).unwrap();
        m.b1.mapv_inplace(|v| v + 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_simple_fn((3, FEATURE_DIM), || rng.random_range(-1.0..1.0));
        let target = ActionLabel::StayIdle;
        let mut g = m.zeros_like();
        m.accumulate_gradient(x.view(), target, &mut g, 1.0).unwrap();
        let analytic: Vec<f64> = g.tensors().iter().flat_map(|(_, t)| t.iter().copied().collect::<Vec<_>>()).collect();
        for k in 0..m.num_params() {
            let loss_at = |delta: f64| {
                let mut p = m.clone();
                let mut seen = 0;
                for (_, mut t) in p.tensors_mut() {
                    if k < seen + t.len() {
                        let flat = t.as_slice_mut().unwrap();
                        flat[k - seen] += delta;
                        break;
                    }
                    seen += t.len();
                }
                cross_entropy(&p.logits(x.view()).unwrap(), target)
            };
            let fd = (loss_at(1e-5) - loss_at(-1e-5)) / 2e-5;
            let a = analytic[k];
            assert!((fd - a).abs() <= 1e-7 + 1e-5 * a.abs(), "param {k}: {a} vs {fd}");
        }
    }

    #[test]
    fn wrong_window_shape_rejected() {
        let m = Ffnn::new(FfnnConfig { win_size: 4, hidden: 3, seed: 0 }).unwrap();
        assert!(m.logits(Array2::zeros((5, FEATURE_DIM)).view()).is_err());
    }
}
