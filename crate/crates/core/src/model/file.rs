//! Model files: the [`crate::container`] format with the classifier's
//! tensors, the feature standardizer and the settings that produced them.

use std::path::Path;

use ndarray::{ArrayView2, ArrayViewMutD};
use serde_json::json;

use super::{argmax, Classifier, Ffnn, FfnnConfig, TrainConfig, Transformer, TransformerConfig};
use crate::container::{Tensor, TensorFile};
use crate::dataset::{SplitConfig, Standardizer};
use crate::error::{Error, Result};
use crate::label::{ActionLabel, FEATURE_DIM, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Transformer(Transformer),
    Ffnn(Ffnn),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Transformer(_) => "transformer",
            Model::Ffnn(_) => "ffnn",
        }
    }

    pub fn win_size(&self) -> usize {
        match self {
            Model::Transformer(m) => m.cfg.win_size,
            Model::Ffnn(m) => m.cfg.win_size,
        }
    }

    pub fn logits(&self, window: ArrayView2<f64>) -> Result<[f64; NUM_CLASSES]> {
        match self {
            Model::Transformer(m) => m.logits(window),
            Model::Ffnn(m) => m.logits(window),
        }
    }

    pub fn predict(&self, window: ArrayView2<f64>) -> Result<ActionLabel> {
        Ok(ActionLabel::from_index(argmax(&self.logits(window)?)).unwrap())
    }

    fn tensors(&self) -> Vec<Tensor> {
        let views = match self {
            Model::Transformer(m) => m.tensors(),
            Model::Ffnn(m) => m.tensors(),
        };
        views
            .into_iter()
            .map(|(name, t)| Tensor::new(format!("param.{name}"), t.shape().to_vec(), t.iter().copied().collect()))
            .collect()
    }

    fn config_json(&self) -> serde_json::Value {
        match self {
            Model::Transformer(m) => serde_json::to_value(m.cfg).unwrap(),
            Model::Ffnn(m) => serde_json::to_value(m.cfg).unwrap(),
        }
    }
}

fn fill_params(views: Vec<(&'static str, ArrayViewMutD<'_, f64>)>, file: &TensorFile) -> Result<()> {
    for (name, mut view) in views {
        let t = file.get(&format!("param.{name}"))?;
        if t.shape != view.shape() {
            return Err(Error::Container(format!("{name}: shape {:?}, expected {:?}", t.shape, view.shape())));
        }
        view.iter_mut().zip(&t.data).for_each(|(d, s)| *d = *s);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub standardizer: Standardizer,
    pub split: SplitConfig,
    pub train: TrainConfig,
}

impl ModelFile {
    pub fn to_container(&self) -> TensorFile {
        let mut tensors = self.model.tensors();
        tensors.push(Tensor::new("standardizer.mean", vec![FEATURE_DIM], self.standardizer.mean.clone()));
        tensors.push(Tensor::new("standardizer.std", vec![FEATURE_DIM], self.standardizer.std.clone()));
        TensorFile {
            meta: json!({
                "kind": self.model.kind(),
                "config": self.model.config_json(),
                "split": self.split,
                "train": self.train,
                "degenerate": self.standardizer.degenerate,
            }),
            tensors,
        }
    }

    pub fn from_container(file: &TensorFile) -> Result<Self> {
        let meta = &file.meta;
        let model = match meta["kind"].as_str() {
            Some("transformer") => {
                let cfg: TransformerConfig = serde_json::from_value(meta["config"].clone())?;
                let mut m = Transformer::new(cfg)?;
                fill_params(m.tensors_mut(), file)?;
                Model::Transformer(m)
            }
            Some("ffnn") => {
                let cfg: FfnnConfig = serde_json::from_value(meta["config"].clone())?;
                let mut m = Ffnn::new(cfg)?;
                fill_params(m.tensors_mut(), file)?;
                Model::Ffnn(m)
            }
            other => return Err(Error::Container(format!("unknown model kind {other:?}"))),
        };
        let standardizer = Standardizer {
            mean: file.get("standardizer.mean")?.data.clone(),
            std: file.get("standardizer.std")?.data.clone(),
            degenerate: serde_json::from_value(meta["degenerate"].clone())?,
        };
        Ok(Self {
            model,
            standardizer,
            split: serde_json::from_value(meta["split"].clone())?,
            train: serde_json::from_value(meta["train"].clone())?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_container().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_container(&TensorFile::load(path)?)
    }
}
