use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::dataset::WindowTensor;
use crate::error::{Error, Result};
use crate::label::{ActionLabel, NUM_CLASSES};

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: ActionLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAverages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Confusion matrix (rows = truth, columns = prediction) and the usual
/// per-class scores. Undefined ratios (0/0) are reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: [[u64; NUM_CLASSES]; NUM_CLASSES],
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_avg: MetricAverages,
    pub weighted_avg: MetricAverages,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_confusion(confusion: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let mut classes = Vec::with_capacity(NUM_CLASSES);
        for (c, row) in confusion.iter().enumerate() {
            let tp = row[c];
            let support: u64 = row.iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            classes.push(ClassMetrics { label: ActionLabel::from_index(c).unwrap(), precision, recall, f1, support });
        }
        let k = NUM_CLASSES as f64;
        let macro_avg = MetricAverages {
            precision: classes.iter().map(|m| m.precision).sum::<f64>() / k,
            recall: classes.iter().map(|m| m.recall).sum::<f64>() / k,
            f1: classes.iter().map(|m| m.f1).sum::<f64>() / k,
        };
        let w = |f: fn(&ClassMetrics) -> f64| {
            if total == 0 {
                0.0
            } else {
                classes.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64
            }
        };
        let weighted_avg = MetricAverages { precision: w(|m| m.precision), recall: w(|m| m.recall), f1: w(|m| m.f1) };
        let correct: u64 = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
        Self { confusion, classes, accuracy: ratio(correct, total), macro_avg, weighted_avg, total }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ActionLabel, ActionLabel)>) -> Self {
        let mut confusion = [[0u64; NUM_CLASSES]; NUM_CLASSES];
        for (truth, pred) in pairs {
            confusion[truth.index()][pred.index()] += 1;
        }
        Self::from_confusion(confusion)
    }

    /// Classification report table: per-class precision/recall/F1/support,
    /// then accuracy, macro and weighted averages.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<16}{:>10}{:>10}{:>10}{:>10}", "Class", "Precision", "Recall", "F1-Score", "Support");
        for m in &self.classes {
            let _ = writeln!(
                s,
                "{:<16}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                m.label.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<16}{:>10}{:>10}{:>10.2}{:>10}", "Accuracy", "", "", self.accuracy, self.total);
        for (name, a) in [("Macro Avg", &self.macro_avg), ("Weighted Avg", &self.weighted_avg)] {
            let _ = writeln!(s, "{:<16}{:>10.2}{:>10.2}{:>10.2}{:>10}", name, a.precision, a.recall, a.f1, self.total);
        }
        s
    }

    /// Confusion matrix with truth rows and predicted columns.
    pub fn confusion_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<16}", "truth \\ pred");
        for l in ActionLabel::ALL {
            let _ = write!(s, "{:>12}", l.name());
        }
        let _ = writeln!(s);
        for (r, row) in self.confusion.iter().enumerate() {
            let _ = write!(s, "{:<16}", ActionLabel::from_index(r).unwrap().name());
            for v in row {
                let _ = write!(s, "{v:>12}");
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Argmax prediction on every window of `test`.
pub fn evaluate<M: Classifier>(model: &M, test: &[WindowTensor]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test split"));
    }
    let mut pairs = Vec::with_capacity(test.len());
    for w in test {
        pairs.push((w.label, model.predict(w.data.view())?));
    }
    Ok(EvalReport::from_pairs(pairs))
}
