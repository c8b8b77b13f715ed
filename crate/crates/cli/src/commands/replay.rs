//! Turns an actuator event log into plain data tables.

use std::fmt::Write as _;
use std::io::BufReader;
use std::path::Path;

use neuroarm_core::actuator::{debounce_violations, read_event_log, EventKind, JOINT_NAMES};
use serde::{Deserialize, Serialize};

use crate::config::HarnessConfig;
use crate::error::CliResult;
use crate::manifest::RunDir;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub events: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub transitions: usize,
    pub protocol_errors: usize,
    pub debounce_violations: usize,
    /// Smallest gap between consecutive transitions, seconds.
    pub min_transition_gap: Option<f64>,
    /// Most transitions inside any one-second span.
    pub max_transitions_per_second: usize,
}

pub fn cmd_replay(cfg: &HarnessConfig, log_path: &Path, run: &mut RunDir) -> CliResult<ReplaySummary> {
    run.input(log_path);
    let events = read_event_log(BufReader::new(std::fs::File::open(log_path)?))?;
    let count = |k: EventKind| events.iter().filter(|e| e.kind == k).count();

    let mut joints = format!("t,action,progress,{}\n", JOINT_NAMES.join(","));
    let mut transitions = String::from("t,action,outgoing_progress\n");
    let mut times = Vec::new();
    for e in &events {
        let name = e.label.map_or("", |l| l.name());
        match e.kind {
            EventKind::TickSample => {
                let j = e.joints;
                let _ = writeln!(
                    joints,
                    "{:.3},{name},{:.4},{:.3},{:.3},{:.3},{:.3}",
                    e.t, e.progress, j[0], j[1], j[2], j[3]
                );
            }
            EventKind::Transition => {
                let _ = writeln!(transitions, "{:.3},{name},{:.4}", e.t, e.progress);
                times.push(e.t);
            }
            _ => {}
        }
    }
    std::fs::write(run.output("joints.csv"), joints)?;
    std::fs::write(run.output("transitions.csv"), transitions)?;

    let min_transition_gap = times.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    let max_transitions_per_second =
        (0..times.len()).map(|i| times[i..].iter().take_while(|&&t| t - times[i] < 1.0).count()).max().unwrap_or(0);
    let summary = ReplaySummary {
        events: events.len(),
        accepted: count(EventKind::Accept),
        rejected: count(EventKind::Reject),
        transitions: times.len(),
        protocol_errors: count(EventKind::ProtocolError),
        debounce_violations: debounce_violations(&events),
        min_transition_gap,
        max_transitions_per_second,
    };
    std::fs::write(run.output("replay_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    run.finish("replay", cfg)?;
    Ok(summary)
}
