//! Rolling-window classification of a live frame stream.

use std::collections::VecDeque;
use std::time::Duration;

use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{softmax, Model};
use crate::dataset::Standardizer;
use crate::error::Result;
use crate::label::{ActionLabel, FEATURE_DIM, NUM_CLASSES};
use crate::transport::FeatureFrame;

/// Default emission cadence.
pub const EMIT_INTERVAL: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Session time of the emission.
    pub at: Duration,
    pub label: ActionLabel,
    pub probabilities: [f64; NUM_CLASSES],
    /// Frame indices of the oldest and newest frame in the window.
    pub first_index: u64,
    pub last_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PredictorEvent {
    Label(Prediction),
    Stall { at: Duration, silent_for: Duration },
}

/// Keeps the newest `win_size` frames and emits an argmax label at most
/// once per interval, starting as soon as the buffer first fills. If no
/// frame arrives for two window durations the buffer is discarded and a
/// stall is reported once.
#[derive(Debug, Clone)]
pub struct OnlinePredictor {
    model: Model,
    standardizer: Standardizer,
    buffer: VecDeque<FeatureFrame>,
    interval: Duration,
    stall_after: Duration,
    last_emit: Option<Duration>,
    last_frame: Option<Duration>,
    stalled: bool,
}

impl OnlinePredictor {
    pub fn new(model: Model, standardizer: Standardizer, frame_rate: f64) -> Self {
        let window = Duration::from_secs_f64(model.win_size() as f64 / frame_rate);
        Self {
            buffer: VecDeque::with_capacity(model.win_size() + 1),
            model,
            standardizer,
            interval: EMIT_INTERVAL,
            stall_after: 2 * window,
            last_emit: None,
            last_frame: None,
            stalled: false,
        }
    }

    pub fn with_interval(mut self, interval: Duration) -> Self {
        self.interval = interval;
        self
    }

    pub fn win_size(&self) -> usize {
        self.model.win_size()
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn push(&mut self, frame: FeatureFrame, now: Duration) -> Result<Option<Prediction>> {
        self.last_frame = Some(now);
        self.stalled = false;
        self.buffer.push_back(frame);
        while self.buffer.len() > self.win_size() {
            self.buffer.pop_front();
        }
        if self.buffer.len() < self.win_size() {
            return Ok(None);
        }
        if self.last_emit.is_some_and(|t| now.saturating_sub(t) < self.interval) {
            return Ok(None);
        }
        let window = Array2::from_shape_fn((self.win_size(), FEATURE_DIM), |(i, j)| {
            self.standardizer.apply(&self.buffer[i].values)[j]
        });
        let logits = self.model.logits(window.view())?;
        let probabilities = softmax(&logits);
        let label = ActionLabel::from_index(super::argmax(&logits)).unwrap();
        self.last_emit = Some(now);
        Ok(Some(Prediction {
            at: now,
            label,
            probabilities,
            first_index: self.buffer.front().unwrap().index,
            last_index: self.buffer.back().unwrap().index,
        }))
    }

    /// Call periodically while waiting for frames.
    pub fn poll(&mut self, now: Duration) -> Option<PredictorEvent> {
        let last = self.last_frame?;
        let silent_for = now.saturating_sub(last);
        if !self.stalled && silent_for > self.stall_after {
            self.stalled = true;
            self.buffer.clear();
            warn!("no frames for {:.1}s, holding labels until the window refills", silent_for.as_secs_f64());
            return Some(PredictorEvent::Stall { at: now, silent_for });
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Transformer, TransformerConfig};

    fn predictor(win: usize) -> OnlinePredictor {
        let cfg = TransformerConfig { win_size: win, model_dim: 8, heads: 2, ff_dim: 4, seed: 1, ..Default::default() };
        let st = Standardizer {
            mean: vec![0.0; FEATURE_DIM],
            std: vec![1.0; FEATURE_DIM],
            degenerate: vec![false; FEATURE_DIM],
        };
        OnlinePredictor::new(Model::Transformer(Transformer::new(cfg).unwrap()), st, 50.0)
    }

    fn frame(i: u64) -> FeatureFrame {
        FeatureFrame { index: i, values: [0.05 * (i % 7) as f64; FEATURE_DIM] }
    }

    #[test]
    fn first_label_after_buffer_fills() {
        let mut p = predictor(100);
        let mut first = None;
        for i in 0..300u64 {
            let now = Duration::from_secs_f64(i as f64 / 50.0);
            if let Some(pred) = p.push(frame(i), now).unwrap() {
                first.get_or_insert(pred);
            }
        }
        let first = first.unwrap();
        assert_eq!(first.last_index, 99);
        assert_eq!(first.first_index, 0);
        // frame 99 arrives at 1.98 s; with frame 0 at t=0 the buffer spans 2 s of data
        assert!(first.at >= Duration::from_secs_f64(1.98));
    }

    #[test]
    fn emits_on_two_second_cadence() {
        let mut p = predictor(20);
        let mut times = Vec::new();
        for i in 0..500u64 {
            let now = Duration::from_millis(i * 20);
            if let Some(pred) = p.push(frame(i), now).unwrap() {
                times.push(pred.at);
            }
        }
        assert!(times.len() >= 4);
        for w in times.windows(2) {
            assert_eq!(w[1] - w[0], Duration::from_secs(2));
        }
    }

    #[test]
    fn starvation_reports_stall_once_and_refills() {
        let mut p = predictor(10);
        for i in 0..10u64 {
            p.push(frame(i), Duration::from_millis(i * 20)).unwrap();
        }
        // two windows at 50 fps = 0.4 s
        assert!(p.poll(Duration::from_millis(500)).is_none());
        assert!(matches!(p.poll(Duration::from_millis(700)), Some(PredictorEvent::Stall { .. })));
        assert!(p.poll(Duration::from_millis(900)).is_none());
        assert_eq!(p.buffered(), 0);
        assert!(p.push(frame(50), Duration::from_secs(10)).unwrap().is_none());
    }
}
