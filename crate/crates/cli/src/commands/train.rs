//! Training: per-action CSVs -> standardized windows -> transformer.

use std::path::{Path, PathBuf};

use log::info;
use neuroarm_core::dataset::{action_files_in, build_split, SplitDataset};
use neuroarm_core::model::{
    evaluate, threshold_sweep, train, window_size_study, EpochStats, EvalReport, Ffnn, Model, ModelFile, Transformer,
};
use serde_json::json;

use crate::config::HarnessConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunDir;
use crate::report;

pub const MODEL_FILE: &str = "model.bin";
pub const HISTORY_FILE: &str = "history.csv";
const THRESHOLD_ATTEMPTS: usize = 20;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model_path: PathBuf,
    pub history_path: PathBuf,
    pub history: Vec<EpochStats>,
    pub report: EvalReport,
}

fn split_summary(split: &SplitDataset) -> serde_json::Value {
    json!({
        "win_size": split.win_size,
        "rows_per_class": split.rows_per_class,
        "windows_per_class": split.windows_per_class,
        "train_windows": split.train.len(),
        "test_windows": split.test.len(),
        "flattened_len": split.win_size * neuroarm_core::FEATURE_DIM,
        "degenerate_features": split.standardizer.degenerate.iter().filter(|d| **d).count(),
    })
}

pub fn cmd_train(cfg: &HarnessConfig, data_dir: &Path, run: &mut RunDir) -> CliResult<TrainOutcome> {
    let files = action_files_in(data_dir)?;
    if files.is_empty() {
        return Err(CliError::Io(format!("no action files in {}", data_dir.display())));
    }
    for (p, _) in &files {
        run.input(p);
    }
    let split_cfg = cfg.split_config();
    let split = build_split(&files, &split_cfg)?;
    info!("{} train / {} test windows of {} frames", split.train.len(), split.test.len(), split.win_size);
    std::fs::write(run.output("split.json"), serde_json::to_string_pretty(&split_summary(&split))?)?;

    let train_cfg = cfg.train_config();
    let net = Transformer::new(cfg.transformer_config(split.win_size))?;
    let (net, history) = train(net, &split, &train_cfg)?;
    let report = evaluate(&net, &split.test)?;

    let model_path = run.output(MODEL_FILE);
    ModelFile {
        model: Model::Transformer(net),
        standardizer: split.standardizer.clone(),
        split: split_cfg,
        train: train_cfg,
    }
    .save(&model_path)?;
    let history_path = run.output(HISTORY_FILE);
    report::write_history(&history_path, &history)?;
    run.output("eval_report.txt");
    run.output("eval_report.json");
    report::write_eval(run.root(), &report)?;

    if cfg.train.compare_ffnn {
        let ffnn = Ffnn::new(cfg.ffnn_config(split.win_size))?;
        let (_, ffnn_history) = train(ffnn, &split, &train_cfg)?;
        report::write_comparison(
            &run.output("architecture_comparison.csv"),
            ("transformer", &history),
            ("ffnn", &ffnn_history),
        )?;
    }
    if !cfg.train.window_sweep.is_empty() {
        let rows = window_size_study(
            &files,
            &cfg.train.window_sweep,
            &split_cfg,
            &cfg.transformer_config(split.win_size),
            &train_cfg,
        )?;
        report::write_window_study(&run.output("window_sizes.json"), &rows)?;
    }
    if !cfg.train.threshold_sweep.is_empty() {
        let rows = threshold_sweep(
            &cfg.profiles(),
            cfg.noise,
            cfg.features,
            &cfg.train.threshold_sweep,
            THRESHOLD_ATTEMPTS,
            cfg.stream_seed(10),
        )?;
        report::write_threshold_sweep(&run.output("threshold_sweep.json"), &rows)?;
    }
    run.finish("train", cfg)?;
    Ok(TrainOutcome { model_path, history_path, history, report })
}
