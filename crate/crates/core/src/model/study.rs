use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{evaluate, train, TrainConfig, Transformer, TransformerConfig};
use crate::dataset::{build_split, SplitConfig};
use crate::error::Result;
use crate::label::ActionLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSizeResult {
    pub win_size: usize,
    pub train_windows: usize,
    pub test_windows: usize,
    pub test_accuracy: f64,
    pub final_val_accuracy: f64,
}

/// Rebuilds the split and retrains the transformer for each window size,
/// everything else held fixed.
pub fn window_size_study(
    files: &[(PathBuf, ActionLabel)],
    sizes: &[usize],
    split: &SplitConfig,
    model: &TransformerConfig,
    train_cfg: &TrainConfig,
) -> Result<Vec<WindowSizeResult>> {
    sizes
        .iter()
        .map(|&win_size| {
            let data = build_split(files, &SplitConfig { win_size, ..*split })?;
            let net = Transformer::new(TransformerConfig { win_size, ..*model })?;
            let (net, history) = train(net, &data, train_cfg)?;
            let report = evaluate(&net, &data.test)?;
            Ok(WindowSizeResult {
                win_size,
                train_windows: data.train.len(),
                test_windows: data.test.len(),
                test_accuracy: report.accuracy,
                final_val_accuracy: history.last().map_or(0.0, |h| h.val_accuracy),
            })
        })
        .collect()
}
