//! Data collection: synthetic headset -> cleaning -> features -> UDP
//! loopback -> per-action CSV files.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use log::info;
use neuroarm_core::clock::{Clock, ScaledClock};
use neuroarm_core::dataset::{action_file_name, append_records, LabeledRecord};
use neuroarm_core::dsp::{ArtifactCleaner, FeatureExtractor};
use neuroarm_core::synth::SignalGenerator;
use neuroarm_core::transport::{FeatureFrame, FrameConsumer, FrameProducer, LossStats, ProducerStats};
use neuroarm_core::{ActionLabel, FEATURE_DIM};

use crate::config::HarnessConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunDir;

#[derive(Debug, Clone)]
pub struct CollectedFile {
    pub path: PathBuf,
    pub label: ActionLabel,
    pub rows: usize,
    pub sent: ProducerStats,
    pub received: LossStats,
}

#[derive(Debug, Clone)]
pub struct CollectOutcome {
    pub files: Vec<CollectedFile>,
}

impl CollectOutcome {
    /// `name.csv: (rows, 20)` per file.
    pub fn dimensions(&self) -> String {
        self.files
            .iter()
            .map(|f| format!("{}: ({}, {FEATURE_DIM})\n", f.path.file_name().unwrap().to_string_lossy(), f.rows))
            .collect()
    }
}

fn transport_err(e: impl std::fmt::Display) -> CliError {
    CliError::Transport(e.to_string())
}

/// Streams one action's session over loopback and returns the frames the
/// consumer saw, sorted by index.
fn stream_action(cfg: &HarnessConfig, label: ActionLabel) -> CliResult<(Vec<FeatureFrame>, ProducerStats, LossStats)> {
    let mut consumer = FrameConsumer::bind((cfg.transport.host.as_str(), cfg.transport.port)).map_err(transport_err)?;
    let target = consumer.local_addr()?;
    let profiles = cfg.profiles();
    let features = cfg.features;
    let noise = cfg.noise;
    let seed = cfg.stream_seed(label.index() as u64);
    let total = (cfg.collect.seconds_per_action * features.rate).round() as u64;
    let clock = ScaledClock::new(cfg.collect.time_scale);
    let done = Arc::new(AtomicBool::new(false));

    let producer_done = Arc::clone(&done);
    let producer = thread::spawn(move || -> CliResult<ProducerStats> {
        let result = (|| {
            let mut gen = SignalGenerator::new(&profiles, noise, seed, features.rate)?;
            gen.set_state(label.brain_state());
            let mut cleaner = ArtifactCleaner::new(features.rate, noise.mains_freq)?;
            let mut extractor = FeatureExtractor::new(features)?;
            let mut tx = FrameProducer::connect(target)?;
            let mut pos = 0u64;
            while pos < total {
                let n = (features.hop as u64).min(total - pos);
                let frames = extractor.push_chunk(&cleaner.process(&gen.next_chunk(n as usize))?)?;
                pos += n;
                clock.sleep_until(Duration::from_secs_f64(pos as f64 / features.rate));
                for f in &frames {
                    tx.send(&FeatureFrame::from(f))?;
                }
            }
            Ok(tx.stats())
        })();
        producer_done.store(true, Ordering::SeqCst);
        result
    });

    let mut frames = Vec::new();
    while !done.load(Ordering::SeqCst) {
        if let Some(f) = consumer.recv_timeout(Duration::from_millis(20))? {
            frames.push(f);
        }
    }
    frames.extend(consumer.drain_until_idle(Duration::from_millis(100))?);
    let sent = producer.join().map_err(|_| CliError::Transport("producer thread panicked".into()))??;
    frames.sort_by_key(|f| f.index);
    frames.dedup_by_key(|f| f.index);
    Ok((frames, sent, consumer.stats()))
}

pub fn cmd_collect(cfg: &HarnessConfig, run: &mut RunDir) -> CliResult<CollectOutcome> {
    let mut files = Vec::new();
    for label in ActionLabel::ALL {
        let (frames, sent, received) = stream_action(cfg, label)?;
        let path = run.output(&action_file_name(label));
        if path.exists() {
            std::fs::remove_file(&path)?;
        }
        let records: Vec<LabeledRecord> =
            frames.iter().map(|f| LabeledRecord { index: f.index, features: f.values, label }).collect();
        append_records(&path, &records)?;
        info!(
            "{}: {} frames sent, {} received, {} gaps, {} dropped locally",
            label.name(),
            sent.sent,
            received.received,
            received.gaps,
            sent.dropped
        );
        files.push(CollectedFile { path, label, rows: records.len(), sent, received });
    }
    let outcome = CollectOutcome { files };
    std::fs::write(run.output("dimensions.txt"), outcome.dimensions())?;
    run.finish("collect", cfg)?;
    Ok(outcome)
}
