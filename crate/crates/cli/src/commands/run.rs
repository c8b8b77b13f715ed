//! Live session: scripted headset -> UDP -> rolling classifier -> serial
//! bytes -> simulated arm, each stage on its own thread.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{info, warn};
use neuroarm_core::actuator::{debounce_violations, run_actuator, write_event_log, ActuatorEvent, EventKind};
use neuroarm_core::clock::{Clock, ScaledClock};
use neuroarm_core::dsp::{ArtifactCleaner, FeatureExtractor};
use neuroarm_core::model::{ModelFile, OnlinePredictor, Prediction, PredictorEvent};
use neuroarm_core::synth::SignalGenerator;
use neuroarm_core::transport::{serial_link, FeatureFrame, FrameConsumer, FrameProducer, LossStats, ProducerStats};
use neuroarm_core::ActionLabel;

use crate::config::HarnessConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunDir;
use crate::report::SessionSummary;

pub const EVENT_LOG: &str = "actuator_log.jsonl";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: SessionSummary,
    pub predictions: Vec<(Prediction, ActionLabel)>,
    pub events: Vec<ActuatorEvent>,
    pub event_log: PathBuf,
}

fn thread_err(name: &str) -> CliError {
    CliError::Transport(format!("{name} thread panicked"))
}

/// Scripted state at the centre of the raw samples behind a prediction.
fn ground_truth(cfg: &HarnessConfig, p: &Prediction) -> ActionLabel {
    let hop = cfg.features.hop as f64;
    let first = p.first_index as f64 * hop;
    let end = p.last_index as f64 * hop + cfg.features.win_len as f64;
    cfg.run.state_at(0.5 * (first + end) / cfg.features.rate).action()
}

fn write_predictions(path: &Path, rows: &[(Prediction, ActionLabel)]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,first_index,last_index,label,truth,p_pick_up_cup,p_shake_hands,p_stay_idle")?;
    for (p, truth) in rows {
        writeln!(
            w,
            "{:.3},{},{},{},{},{:.6},{:.6},{:.6}",
            p.at.as_secs_f64(),
            p.first_index,
            p.last_index,
            p.label.index(),
            truth.index(),
            p.probabilities[0],
            p.probabilities[1],
            p.probabilities[2]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_run(cfg: &HarnessConfig, model_path: &Path, run: &mut RunDir) -> CliResult<RunOutcome> {
    let mf = ModelFile::load(model_path)?;
    run.input(model_path);
    let features = cfg.features;
    let rate = features.rate;
    let total = (cfg.run.duration_s * rate).round() as u64;
    let hold = (cfg.run.hold_s * rate).round().max(1.0) as u64;

    let mut consumer = FrameConsumer::bind((cfg.transport.host.as_str(), cfg.transport.port))
        .map_err(|e| CliError::Transport(e.to_string()))?;
    let target = consumer.local_addr()?;
    let (serial_tx, mut serial_rx) = serial_link(Duration::from_millis(cfg.transport.serial_latency_ms));
    let clock = ScaledClock::new(cfg.run.time_scale);
    let done = Arc::new(AtomicBool::new(false));

    // producer
    let producer = {
        let (profiles, noise, script, done) = (cfg.profiles(), cfg.noise, cfg.run.clone(), Arc::clone(&done));
        let seed = cfg.stream_seed(100);
        thread::spawn(move || -> CliResult<ProducerStats> {
            let result = (|| {
                let mut gen = SignalGenerator::new(&profiles, noise, seed, rate)?;
                let mut cleaner = ArtifactCleaner::new(rate, noise.mains_freq)?;
                let mut extractor = FeatureExtractor::new(features)?;
                let mut tx = FrameProducer::connect(target)?;
                let mut pos = 0u64;
                while pos < total {
                    gen.set_state(script.state_at(pos as f64 / rate));
                    let to_boundary = hold - pos % hold;
                    let n = (features.hop as u64).min(total - pos).min(to_boundary);
                    let frames = extractor.push_chunk(&cleaner.process(&gen.next_chunk(n as usize))?)?;
                    pos += n;
                    clock.sleep_until(Duration::from_secs_f64(pos as f64 / rate));
                    for f in &frames {
                        tx.send(&FeatureFrame::from(f))?;
                    }
                }
                Ok(tx.stats())
            })();
            done.store(true, Ordering::SeqCst);
            result
        })
    };

    // classifier
    let classifier = {
        let done = Arc::clone(&done);
        let mut predictor = OnlinePredictor::new(mf.model.clone(), mf.standardizer.clone(), features.frame_rate());
        thread::spawn(move || -> CliResult<(Vec<Prediction>, LossStats, u64)> {
            let mut predictions = Vec::new();
            let mut stalls = 0;
            let mut idle_since: Option<Instant> = None;
            loop {
                match consumer.recv_timeout(Duration::from_millis(10))? {
                    Some(frame) => {
                        idle_since = None;
                        if let Some(p) = predictor.push(frame, clock.now())? {
                            serial_tx.send_action(p.label)?;
                            predictions.push(p);
                        }
                    }
                    None => {
                        if let Some(PredictorEvent::Stall { .. }) = predictor.poll(clock.now()) {
                            stalls += 1;
                        }
                        if done.load(Ordering::SeqCst) {
                            let since = *idle_since.get_or_insert_with(Instant::now);
                            if since.elapsed() > Duration::from_millis(100) {
                                break;
                            }
                        }
                    }
                }
            }
            // dropping serial_tx here closes the link and stops the actuator
            Ok((predictions, consumer.stats(), stalls))
        })
    };

    // actuator
    let actuator = {
        let act_cfg = cfg.actuator;
        let until = Duration::from_secs_f64(cfg.run.duration_s + 10.0);
        thread::spawn(move || run_actuator(&mut serial_rx, &clock, act_cfg, until))
    };

    let sent = producer.join().map_err(|_| thread_err("producer"))??;
    let (predictions, loss, stalls) = classifier.join().map_err(|_| thread_err("classifier"))??;
    let events = actuator.join().map_err(|_| thread_err("actuator"))??;
    if sent.dropped > 0 {
        warn!("{} frames dropped by the sender", sent.dropped);
    }

    let labelled: Vec<(Prediction, ActionLabel)> = predictions.iter().map(|p| (*p, ground_truth(cfg, p))).collect();
    let pairs: Vec<(ActionLabel, ActionLabel)> = labelled.iter().map(|(p, t)| (*t, p.label)).collect();
    let count = |k: EventKind| events.iter().filter(|e| e.kind == k).count() as u64;
    let summary = SessionSummary {
        per_action: SessionSummary::from_pairs(&pairs),
        emissions: pairs.len() as u64,
        frames_received: loss.received,
        gaps: loss.gaps,
        reorders: loss.reorders,
        format_errors: loss.format_errors,
        stalls,
        transitions: count(EventKind::Transition),
        rejected_labels: count(EventKind::Reject),
        debounce_violations: debounce_violations(&events),
    };
    info!("online success: {}", summary.headline());

    write_predictions(&run.output("predictions.csv"), &labelled)?;
    let event_log = run.output(EVENT_LOG);
    write_event_log(BufWriter::new(File::create(&event_log)?), &events)?;
    std::fs::write(run.output("session_summary.txt"), summary.to_text())?;
    std::fs::write(run.output("session_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    run.finish("run", cfg)?;
    Ok(RunOutcome { summary, predictions: labelled, events, event_log })
}
