//! Held-out evaluation of a saved model.

use std::path::Path;

use neuroarm_core::dataset::{action_files_in, build_split_with};
use neuroarm_core::model::{evaluate, EvalReport, Model, ModelFile};

use crate::config::HarnessConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunDir;
use crate::report;

/// Rebuilds the split recorded in the model file (same seed, same
/// standardizer) and scores the test windows.
pub fn cmd_eval(cfg: &HarnessConfig, model_path: &Path, data_dir: &Path, run: &mut RunDir) -> CliResult<EvalReport> {
    let mf = ModelFile::load(model_path)?;
    run.input(model_path);
    let files = action_files_in(data_dir)?;
    if files.is_empty() {
        return Err(CliError::Io(format!("no action files in {}", data_dir.display())));
    }
    for (p, _) in &files {
        run.input(p);
    }
    let split = build_split_with(&files, &mf.split, Some(&mf.standardizer))?;
    let report = match &mf.model {
        Model::Transformer(m) => evaluate(m, &split.test)?,
        Model::Ffnn(m) => evaluate(m, &split.test)?,
    };
    run.output("eval_report.txt");
    run.output("eval_report.json");
    report::write_eval(run.root(), &report)?;
    run.finish("eval", cfg)?;
    Ok(report)
}
