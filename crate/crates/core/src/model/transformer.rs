//! Single-block transformer encoder classifier.
//!
//! ```text
//! X (T x 20) -> X Win + b                    input projection  -> H (T x D)
//!            -> H + MHSA(H)                   attention + residual
//!            -> LayerNorm (per row)
//!            -> mean over T                   average pooling    -> p (D)
//!            -> GELU(p W1 + b1) W2 + b2       two dense layers   -> logits (3)
//! ```
//!
//! There is no positional encoding, so the logits do not depend on the
//! order of the rows.

use ndarray::{s, Array1, Array2, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cross_entropy, logit_gradient, Classifier};
use crate::error::{Error, Result};
use crate::label::{ActionLabel, FEATURE_DIM, NUM_CLASSES};

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformerConfig {
    pub win_size: usize,
    pub feat_dim: usize,
    pub model_dim: usize,
    pub heads: usize,
    pub ff_dim: usize,
    pub classes: usize,
    pub seed: u64,
}

impl Default for TransformerConfig {
    fn default() -> Self {
        Self { win_size: 80, feat_dim: FEATURE_DIM, model_dim: 32, heads: 4, ff_dim: 64, classes: NUM_CLASSES, seed: 0 }
    }
}

impl TransformerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feat_dim != FEATURE_DIM || self.classes != NUM_CLASSES {
            return Err(Error::Config(format!("transformer needs feat_dim {FEATURE_DIM} and {NUM_CLASSES} classes")));
        }
        if self.heads == 0 || self.model_dim == 0 || !self.model_dim.is_multiple_of(self.heads) {
            return Err(Error::Config(format!(
                "model_dim {} must be a positive multiple of heads {}",
                self.model_dim, self.heads
            )));
        }
        if self.ff_dim == 0 || self.win_size == 0 {
            return Err(Error::Config("ff_dim and win_size must be positive".into()));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.model_dim / self.heads
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transformer {
    pub cfg: TransformerConfig,
    pub w_in: Array2<f64>,
    pub b_in: Array1<f64>,
    pub w_q: Array2<f64>,
    pub b_q: Array1<f64>,
    pub w_k: Array2<f64>,
    pub b_k: Array1<f64>,
    pub w_v: Array2<f64>,
    pub b_v: Array1<f64>,
    pub w_o: Array2<f64>,
    pub b_o: Array1<f64>,
    pub ln_gain: Array1<f64>,
    pub ln_bias: Array1<f64>,
    pub w_ff1: Array2<f64>,
    pub b_ff1: Array1<f64>,
    pub w_ff2: Array2<f64>,
    pub b_ff2: Array1<f64>,
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_K: f64 = 0.044_715;

/// tanh approximation of GELU.
pub(crate) fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_K * x * x * x)).tanh())
}

pub(crate) fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + GELU_K * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_K * x * x)
}

fn softmax_rows(m: &mut Array2<f64>) {
    for mut row in m.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Activations kept for the backward pass.
struct Cache {
    h: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    attn: Vec<Array2<f64>>,
    concat: Array2<f64>,
    normed: Array2<f64>,
    inv_std: Array1<f64>,
    pooled: Array1<f64>,
    ff_pre: Array1<f64>,
    ff_act: Array1<f64>,
}

impl Transformer {
    pub fn new(cfg: TransformerConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (f, d, ff, c) = (cfg.feat_dim, cfg.model_dim, cfg.ff_dim, cfg.classes);
        Ok(Self {
            cfg,
            w_in: xavier(&mut rng, f, d),
            b_in: Array1::zeros(d),
            w_q: xavier(&mut rng, d, d),
            b_q: Array1::zeros(d),
            w_k: xavier(&mut rng, d, d),
            b_k: Array1::zeros(d),
            w_v: xavier(&mut rng, d, d),
            b_v: Array1::zeros(d),
            w_o: xavier(&mut rng, d, d),
            b_o: Array1::zeros(d),
            ln_gain: Array1::ones(d),
            ln_bias: Array1::zeros(d),
            w_ff1: xavier(&mut rng, d, ff),
            b_ff1: Array1::zeros(ff),
            w_ff2: xavier(&mut rng, ff, c),
            b_ff2: Array1::zeros(c),
        })
    }

    fn check_input(&self, window: &ArrayView2<f64>) -> Result<()> {
        if window.ncols() != self.cfg.feat_dim || window.nrows() == 0 {
            return Err(Error::dim(format!("T x {}", self.cfg.feat_dim), format!("{:?}", window.dim())));
        }
        Ok(())
    }

    fn forward(&self, x: ArrayView2<f64>) -> Result<([f64; NUM_CLASSES], Cache)> {
        self.check_input(&x)?;
        let t = x.nrows();
        let dk = self.cfg.head_dim();
        let scale = 1.0 / (dk as f64).sqrt();

        let h = x.dot(&self.w_in) + &self.b_in;
        let q = h.dot(&self.w_q) + &self.b_q;
        let k = h.dot(&self.w_k) + &self.b_k;
        let v = h.dot(&self.w_v) + &self.b_v;

        let mut concat = Array2::zeros((t, self.cfg.model_dim));
        let mut attn = Vec::with_capacity(self.cfg.heads);
        for hd in 0..self.cfg.heads {
            let cols = s![.., hd * dk..(hd + 1) * dk];
            let mut a = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut a);
            concat.slice_mut(cols).assign(&a.dot(&v.slice(cols)));
            attn.push(a);
        }
        let resid = &h + &(concat.dot(&self.w_o) + &self.b_o);

        let d = self.cfg.model_dim as f64;
        let mean = resid.mean_axis(Axis(1)).unwrap();
        let centered = &resid - &mean.view().insert_axis(Axis(1));
        let var = centered.mapv(|v| v * v).sum_axis(Axis(1)) / d;
        let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
        let normed = centered * inv_std.view().insert_axis(Axis(1));
        let ln_out = &normed * &self.ln_gain + &self.ln_bias;

        let pooled = ln_out.mean_axis(Axis(0)).unwrap();
        let ff_pre = pooled.dot(&self.w_ff1) + &self.b_ff1;
        let ff_act = ff_pre.mapv(gelu);
        let out = ff_act.dot(&self.w_ff2) + &self.b_ff2;
        let logits = [out[0], out[1], out[2]];
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::Diverged { epoch: 0, loss: f64::NAN });
        }
        Ok((logits, Cache { h, q, k, v, attn, concat, normed, inv_std, pooled, ff_pre, ff_act }))
    }

    fn backward(&self, x: ArrayView2<f64>, cache: &Cache, dlogits: &[f64; NUM_CLASSES], grad: &mut Self, scale: f64) {
        let t = x.nrows();
        let dk = self.cfg.head_dim();
        let attn_scale = 1.0 / (dk as f64).sqrt();
        let dout = Array1::from_iter(dlogits.iter().map(|g| g * scale));

        // dense head
        grad.b_ff2 += &dout;
        grad.w_ff2 += &outer(&cache.ff_act, &dout);
        let dact = self.w_ff2.dot(&dout);
        let dpre = &dact * &cache.ff_pre.mapv(gelu_grad);
        grad.b_ff1 += &dpre;
        grad.w_ff1 += &outer(&cache.pooled, &dpre);
        let dpooled = self.w_ff1.dot(&dpre);

        // mean pooling: every row receives dpooled / T
        let drow = dpooled / t as f64;

        // layer norm
        grad.ln_bias.scaled_add(t as f64, &drow);
        grad.ln_gain += &(cache.normed.sum_axis(Axis(0)) * &drow);
        let dnormed_row = &drow * &self.ln_gain;
        let d = self.cfg.model_dim as f64;
        let mut dresid = Array2::zeros((t, self.cfg.model_dim));
        let mean_dn = dnormed_row.sum() / d;
        for (i, mut out_row) in dresid.rows_mut().into_iter().enumerate() {
            let n = cache.normed.row(i);
            let proj = n.dot(&dnormed_row) / d;
            let inv = cache.inv_std[i];
            for j in 0..self.cfg.model_dim {
                out_row[j] = inv * (dnormed_row[j] - mean_dn - n[j] * proj);
            }
        }

        // attention output projection; residual passes dresid straight to H
        grad.b_o += &dresid.sum_axis(Axis(0));
        grad.w_o += &cache.concat.t().dot(&dresid);
        let dconcat = dresid.dot(&self.w_o.t());
        let mut dh = dresid;

        let mut dq = Array2::zeros((t, self.cfg.model_dim));
        let mut dk_m = Array2::zeros((t, self.cfg.model_dim));
        let mut dv = Array2::zeros((t, self.cfg.model_dim));
        for (hd, a) in cache.attn.iter().enumerate() {
            let cols = s![.., hd * dk..(hd + 1) * dk];
            let do_h = dconcat.slice(cols);
            let da = do_h.dot(&cache.v.slice(cols).t());
            dv.slice_mut(cols).assign(&a.t().dot(&do_h));
            let row_dot = (&da * a).sum_axis(Axis(1));
            let ds = (da - &row_dot.insert_axis(Axis(1))) * a * attn_scale;
            dq.slice_mut(cols).assign(&ds.dot(&cache.k.slice(cols)));
            dk_m.slice_mut(cols).assign(&ds.t().dot(&cache.q.slice(cols)));
        }
        for (dproj, w, gw, gb) in [
            (&dq, &self.w_q, &mut grad.w_q, &mut grad.b_q),
            (&dk_m, &self.w_k, &mut grad.w_k, &mut grad.b_k),
            (&dv, &self.w_v, &mut grad.w_v, &mut grad.b_v),
        ] {
            *gb += &dproj.sum_axis(Axis(0));
            *gw += &cache.h.t().dot(dproj);
            dh += &dproj.dot(&w.t());
        }

        grad.b_in += &dh.sum_axis(Axis(0));
        grad.w_in += &x.t().dot(&dh);
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let a2 = a.view().insert_axis(Axis(1));
    let b2 = b.view().insert_axis(Axis(0));
    a2.dot(&b2)
}

impl Classifier for Transformer {
    fn logits(&self, window: ArrayView2<f64>) -> Result<[f64; NUM_CLASSES]> {
        Ok(self.forward(window)?.0)
    }

    fn accumulate_gradient(
        &self,
        window: ArrayView2<f64>,
        target: ActionLabel,
        grad: &mut Self,
        scale: f64,
    ) -> Result<(f64, [f64; NUM_CLASSES])> {
        let (logits, cache) = self.forward(window)?;
        let dlogits = logit_gradient(&logits, target);
        self.backward(window, &cache, &dlogits, grad, scale);
        Ok((cross_entropy(&logits, target), logits))
    }

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, mut t) in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)> {
        vec![
            ("w_in", self.w_in.view().into_dyn()),
            ("b_in", self.b_in.view().into_dyn()),
            ("w_q", self.w_q.view().into_dyn()),
            ("b_q", self.b_q.view().into_dyn()),
            ("w_k", self.w_k.view().into_dyn()),
            ("b_k", self.b_k.view().into_dyn()),
            ("w_v", self.w_v.view().into_dyn()),
            ("b_v", self.b_v.view().into_dyn()),
            ("w_o", self.w_o.view().into_dyn()),
            ("b_o", self.b_o.view().into_dyn()),
            ("ln_gain", self.ln_gain.view().into_dyn()),
            ("ln_bias", self.ln_bias.view().into_dyn()),
            ("w_ff1", self.w_ff1.view().into_dyn()),
            ("b_ff1", self.b_ff1.view().into_dyn()),
            ("w_ff2", self.w_ff2.view().into_dyn()),
            ("b_ff2", self.b_ff2.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)> {
        vec![
            ("w_in", self.w_in.view_mut().into_dyn()),
            ("b_in", self.b_in.view_mut().into_dyn()),
            ("w_q", self.w_q.view_mut().into_dyn()),
            ("b_q", self.b_q.view_mut().into_dyn()),
            ("w_k", self.w_k.view_mut().into_dyn()),
            ("b_k", self.b_k.view_mut().into_dyn()),
            ("w_v", self.w_v.view_mut().into_dyn()),
            ("b_v", self.b_v.view_mut().into_dyn()),
            ("w_o", self.w_o.view_mut().into_dyn()),
            ("b_o", self.b_o.view_mut().into_dyn()),
            ("ln_gain", self.ln_gain.view_mut().into_dyn()),
            ("ln_bias", self.ln_bias.view_mut().into_dyn()),
            ("w_ff1", self.w_ff1.view_mut().into_dyn()),
            ("b_ff1", self.b_ff1.view_mut().into_dyn()),
            ("w_ff2", self.w_ff2.view_mut().into_dyn()),
            ("b_ff2", self.b_ff2.view_mut().into_dyn()),
        ]
    }
}
