//! Simulated 4-joint arm driven by action bytes.
//!
//! A new label is ignored until the running action is at least a third
//! complete; this keeps the servos from oscillating between poses when the
//! classifier flips.

use std::io::{BufRead, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::label::{ActionLabel, NUM_CLASSES};
use crate::transport::{RecvAction, SerialRx};

pub const NUM_JOINTS: usize = 4;
pub const JOINT_NAMES: [&str; NUM_JOINTS] = ["shoulder", "elbow", "wrist", "grip"];
pub const JOINT_MIN: f64 = 0.0;
pub const JOINT_MAX: f64 = 180.0;
/// Progress an action must reach before a different label is accepted.
pub const DEBOUNCE_PROGRESS: f64 = 1.0 / 3.0;

pub type Pose = [f64; NUM_JOINTS];

pub const NEUTRAL_POSE: Pose = [90.0, 90.0, 90.0, 10.0];

/// Keyframes `(progress, pose)`, progress strictly increasing from 0 to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    keyframes: Vec<(f64, Pose)>,
}

impl Trajectory {
    pub fn new(keyframes: Vec<(f64, Pose)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Config(format!("trajectory: {m}")));
        if keyframes.len() < 2 {
            return bad("needs at least two keyframes");
        }
        if keyframes[0].0 != 0.0 || keyframes.last().unwrap().0 != 1.0 {
            return bad("progress must run from 0 to 1");
        }
        if keyframes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("progress must be strictly increasing");
        }
        if keyframes.iter().flat_map(|(_, p)| p).any(|a| !(JOINT_MIN..=JOINT_MAX).contains(a)) {
            return bad("joint angle outside [0, 180]");
        }
        Ok(Self { keyframes })
    }

    pub fn keyframes(&self) -> &[(f64, Pose)] {
        &self.keyframes
    }

    pub fn final_pose(&self) -> Pose {
        self.keyframes.last().unwrap().1
    }

    /// Linear interpolation at `progress`. The first segment starts from
    /// `start` (the pose the arm was in when the action began) rather than
    /// the first keyframe, so switching actions never jumps a joint.
    pub fn pose_at(&self, progress: f64, start: Pose) -> Pose {
        let p = progress.clamp(0.0, 1.0);
        let seg = self.keyframes.windows(2).position(|w| p <= w[1].0).unwrap_or(self.keyframes.len() - 2);
        let (p0, a) = self.keyframes[seg];
        let (p1, b) = self.keyframes[seg + 1];
        let a = if seg == 0 { start } else { a };
        let u = (p - p0) / (p1 - p0);
        std::array::from_fn(|j| a[j] + u * (b[j] - a[j]))
    }

    pub fn idle() -> Self {
        Self::new(vec![(0.0, NEUTRAL_POSE), (1.0, NEUTRAL_POSE)]).unwrap()
    }

    /// Grip, then elbow pumps.
    pub fn handshake() -> Self {
        Self::new(vec![
            (0.0, NEUTRAL_POSE),
            (0.2, [90.0, 110.0, 90.0, 70.0]),
            (0.4, [90.0, 125.0, 90.0, 70.0]),
            (0.6, [90.0, 100.0, 90.0, 70.0]),
            (0.8, [90.0, 125.0, 90.0, 70.0]),
            (1.0, [90.0, 110.0, 90.0, 70.0]),
        ])
        .unwrap()
    }

    /// Reach, close the grip, raise the elbow.
    pub fn cup_pickup() -> Self {
        Self::new(vec![
            (0.0, NEUTRAL_POSE),
            (0.3, [75.0, 100.0, 90.0, 10.0]),
            (0.6, [75.0, 100.0, 90.0, 150.0]),
            (1.0, [75.0, 140.0, 90.0, 150.0]),
        ])
        .unwrap()
    }

    pub fn for_action(a: ActionLabel) -> Self {
        match a {
            ActionLabel::PickUpCup => Self::cup_pickup(),
            ActionLabel::ShakeHands => Self::handshake(),
            ActionLabel::StayIdle => Self::idle(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActuatorConfig {
    /// Seconds for one action to run from progress 0 to 1.
    pub action_duration: f64,
    pub tick_hz: f64,
    /// Log a pose sample every this many ticks (0 disables).
    pub sample_every: u64,
}

impl Default for ActuatorConfig {
    fn default() -> Self {
        Self { action_duration: 3.0, tick_hz: 100.0, sample_every: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorState {
    pub current: ActionLabel,
    pub progress: f64,
    pub joints: Pose,
    pub action_duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Accept,
    Reject,
    /// A different action started; `progress` is the outgoing action's.
    Transition,
    TickSample,
    ProtocolError,
}

/// One line of the actuator log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorEvent {
    /// Session time in seconds.
    pub t: f64,
    pub kind: EventKind,
    pub label: Option<ActionLabel>,
    pub progress: f64,
    pub joints: Pose,
}

#[derive(Debug, Clone)]
pub struct Actuator {
    cfg: ActuatorConfig,
    state: ActuatorState,
    start_pose: Pose,
    trajectories: [Trajectory; NUM_CLASSES],
    ticks: u64,
    log: Vec<ActuatorEvent>,
}

impl Actuator {
    /// Starts idle, at rest in the neutral pose (progress 1).
    pub fn new(cfg: ActuatorConfig) -> Result<Self> {
        if !(cfg.action_duration > 0.0 && cfg.tick_hz > 0.0) {
            return Err(Error::Config("action_duration and tick_hz must be positive".into()));
        }
        Ok(Self {
            cfg,
            state: ActuatorState {
                current: ActionLabel::StayIdle,
                progress: 1.0,
                joints: NEUTRAL_POSE,
                action_duration: cfg.action_duration,
            },
            start_pose: NEUTRAL_POSE,
            trajectories: ActionLabel::ALL.map(Trajectory::for_action),
            ticks: 0,
            log: Vec::new(),
        })
    }

    pub fn with_trajectory(mut self, a: ActionLabel, t: Trajectory) -> Self {
        self.trajectories[a.index()] = t;
        self
    }

    pub fn state(&self) -> &ActuatorState {
        &self.state
    }

    pub fn log(&self) -> &[ActuatorEvent] {
        &self.log
    }

    pub fn into_log(self) -> Vec<ActuatorEvent> {
        self.log
    }

    fn record(&mut self, t: f64, kind: EventKind, label: Option<ActionLabel>, progress: f64) {
        self.log.push(ActuatorEvent { t, kind, label, progress, joints: self.state.joints });
    }

    pub fn record_protocol_error(&mut self, t: f64) {
        self.record(t, EventKind::ProtocolError, None, self.state.progress);
    }

    /// Returns whether the label was accepted.
    pub fn submit_label(&mut self, label: ActionLabel, now: f64) -> bool {
        let progress = self.state.progress;
        if progress < DEBOUNCE_PROGRESS {
            self.record(now, EventKind::Reject, Some(label), progress);
            return false;
        }
        self.record(now, EventKind::Accept, Some(label), progress);
        if label != self.state.current {
            self.record(now, EventKind::Transition, Some(label), progress);
            self.state.current = label;
            self.state.progress = 0.0;
            self.start_pose = self.state.joints;
        }
        true
    }

    pub fn tick(&mut self, dt: f64, now: f64) -> &ActuatorState {
        debug_assert!(dt > 0.0);
        self.state.progress = (self.state.progress + dt / self.cfg.action_duration).min(1.0);
        let traj = &self.trajectories[self.state.current.index()];
        self.state.joints = traj.pose_at(self.state.progress, self.start_pose);
        self.ticks += 1;
        if self.cfg.sample_every > 0 && self.ticks.is_multiple_of(self.cfg.sample_every) {
            self.record(now, EventKind::TickSample, Some(self.state.current), self.state.progress);
        }
        &self.state
    }

    /// Deterministic simulation of a timed label script for `duration`
    /// seconds. Labels due at or before a tick are applied before it.
    pub fn replay(cfg: ActuatorConfig, script: &[(f64, ActionLabel)], duration: f64) -> Result<Vec<ActuatorEvent>> {
        let mut act = Self::new(cfg)?;
        let dt = 1.0 / cfg.tick_hz;
        let mut next = script.iter().peekable();
        let n_ticks = (duration * cfg.tick_hz).round() as u64;
        for k in 0..n_ticks {
            let t = k as f64 * dt;
            while let Some((at, label)) = next.next_if(|(at, _)| *at <= t) {
                act.submit_label(*label, *at);
            }
            act.tick(dt, t + dt);
        }
        Ok(act.into_log())
    }
}

/// Drives an actuator from a serial link on `clock` until `until` session
/// time passes or the sender hangs up.
pub fn run_actuator(
    rx: &mut SerialRx,
    clock: &dyn Clock,
    cfg: ActuatorConfig,
    until: Duration,
) -> Result<Vec<ActuatorEvent>> {
    let mut act = Actuator::new(cfg)?;
    let dt = Duration::from_secs_f64(1.0 / cfg.tick_hz);
    let mut next_tick = clock.now() + dt;
    let mut closed = false;
    while !closed && next_tick <= until {
        loop {
            let now = clock.now();
            if now >= next_tick {
                break;
            }
            match rx.recv_action_timeout(clock.to_wall(next_tick - now)) {
                RecvAction::Action(a) => {
                    act.submit_label(a, clock.now().as_secs_f64());
                }
                RecvAction::Invalid(_) => act.record_protocol_error(clock.now().as_secs_f64()),
                RecvAction::Timeout => {}
                RecvAction::Closed => {
                    closed = true;
                    break;
                }
            }
        }
        act.tick(dt.as_secs_f64(), next_tick.as_secs_f64());
        next_tick += dt;
    }
    Ok(act.into_log())
}

/// JSON lines, one event per line.
pub fn write_event_log<W: Write>(mut w: W, events: &[ActuatorEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_event_log<R: BufRead>(r: R) -> Result<Vec<ActuatorEvent>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Debounce violations in a log: transitions taken while the outgoing
/// action was under a third complete.
pub fn debounce_violations(log: &[ActuatorEvent]) -> usize {
    log.iter().filter(|e| e.kind == EventKind::Transition && e.progress < DEBOUNCE_PROGRESS).count()
}
