//! Text and JSON outputs for evaluation and live sessions.

use std::fmt::Write as _;
use std::path::Path;

use neuroarm_core::model::{EpochStats, EvalReport, SweepPoint, WindowSizeResult};
use neuroarm_core::{ActionLabel, NUM_CLASSES};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

/// Figures published for the hardware prototype on human subjects, as
/// (idle, handshake, cup pickup). Printed beside our own numbers for
/// context only.
pub const REFERENCE_SUCCESS: [(&str, [f64; 3]); 3] = [
    ("prototype summary", [0.91, 0.85, 0.84]),
    ("prototype recall", [0.92, 0.86, 0.82]),
    ("prototype closing", [0.90, 0.80, 0.80]),
];

pub fn write_eval(dir: &Path, report: &EvalReport) -> CliResult<()> {
    let text = format!("{}\n{}", report.to_table(), report.confusion_table());
    std::fs::write(dir.join("eval_report.txt"), text)?;
    std::fs::write(dir.join("eval_report.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

pub fn write_history(path: &Path, history: &[EpochStats]) -> CliResult<()> {
    let mut s = String::from("epoch,train_loss,train_accuracy,val_accuracy\n");
    for e in history {
        let _ = writeln!(s, "{},{:.17e},{:.17e},{:.17e}", e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy);
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_comparison(path: &Path, a: (&str, &[EpochStats]), b: (&str, &[EpochStats])) -> CliResult<()> {
    let mut s = format!("epoch,{0}_train,{0}_val,{1}_train,{1}_val\n", a.0, b.0);
    for (x, y) in a.1.iter().zip(b.1) {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6}",
            x.epoch, x.train_accuracy, x.val_accuracy, y.train_accuracy, y.val_accuracy
        );
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_window_study(path: &Path, rows: &[WindowSizeResult]) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(rows)?)?;
    Ok(())
}

pub fn write_threshold_sweep(path: &Path, rows: &[SweepPoint]) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(rows)?)?;
    Ok(())
}

/// Online success for one action: emissions whose label matched the
/// scripted state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSuccess {
    pub label: ActionLabel,
    pub emissions: u64,
    pub hits: u64,
}

impl ActionSuccess {
    pub fn rate(&self) -> f64 {
        if self.emissions == 0 {
            0.0
        } else {
            self.hits as f64 / self.emissions as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub per_action: Vec<ActionSuccess>,
    pub emissions: u64,
    pub frames_received: u64,
    pub gaps: u64,
    pub reorders: u64,
    pub format_errors: u64,
    pub stalls: u64,
    pub transitions: u64,
    pub rejected_labels: u64,
    pub debounce_violations: usize,
}

impl SessionSummary {
    pub fn from_pairs(pairs: &[(ActionLabel, ActionLabel)]) -> Vec<ActionSuccess> {
        let mut out: Vec<ActionSuccess> =
            ActionLabel::ALL.iter().map(|&label| ActionSuccess { label, emissions: 0, hits: 0 }).collect();
        for &(truth, pred) in pairs {
            let s = &mut out[truth.index()];
            s.emissions += 1;
            s.hits += u64::from(truth == pred);
        }
        out
    }

    pub fn rate(&self, label: ActionLabel) -> f64 {
        self.per_action[label.index()].rate()
    }

    /// One line in the "91% for idle/stationary, ..." style.
    pub fn headline(&self) -> String {
        let pct = |l| format!("{:.0}%", 100.0 * self.rate(l));
        format!(
            "{} for idle/stationary, {} for handshake, and {} for cup pickup",
            pct(ActionLabel::StayIdle),
            pct(ActionLabel::ShakeHands),
            pct(ActionLabel::PickUpCup)
        )
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "online success: {}", self.headline());
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<20}{:>8}{:>8}{:>8}", "", "idle", "hand", "cup");
        let ours = [ActionLabel::StayIdle, ActionLabel::ShakeHands, ActionLabel::PickUpCup].map(|l| self.rate(l));
        let _ = writeln!(s, "{:<20}{:>8.2}{:>8.2}{:>8.2}", "this session", ours[0], ours[1], ours[2]);
        for (name, v) in REFERENCE_SUCCESS {
            let _ = writeln!(s, "{:<20}{:>8.2}{:>8.2}{:>8.2}", name, v[0], v[1], v[2]);
        }
        let _ = writeln!(s);
        for a in &self.per_action {
            let _ = writeln!(s, "{:<12} {:>4}/{:<4} emissions correct", a.label.name(), a.hits, a.emissions);
        }
        let _ = writeln!(
            s,
            "frames {} gaps {} reorders {} malformed {} stalls {}",
            self.frames_received, self.gaps, self.reorders, self.format_errors, self.stalls
        );
        let _ = writeln!(
            s,
            "actuator transitions {} rejected labels {} debounce violations {}",
            self.transitions, self.rejected_labels, self.debounce_violations
        );
        s
    }
}

const _: () = assert!(NUM_CLASSES == 3);
