//! Action labels, brain states and the fixed channel/band layout shared by
//! every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Number of EEG channels (Fp1, Fp2, T3, T4).
pub const NUM_CHANNELS: usize = 4;
/// Number of frequency bands per channel.
pub const NUM_BANDS: usize = 5;
/// Length of a feature vector: bands x channels.
pub const FEATURE_DIM: usize = NUM_CHANNELS * NUM_BANDS;
/// Number of action classes.
pub const NUM_CLASSES: usize = 3;

/// Electrode site labels in channel order.
pub const CHANNEL_NAMES: [&str; NUM_CHANNELS] = ["Fp1", "Fp2", "T3", "T4"];

/// The three arm actions. The discriminant is the wire/CSV label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionLabel {
    PickUpCup = 0,
    ShakeHands = 1,
    StayIdle = 2,
}

impl ActionLabel {
    pub const ALL: [ActionLabel; NUM_CLASSES] =
        [ActionLabel::PickUpCup, ActionLabel::ShakeHands, ActionLabel::StayIdle];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Name used for per-action data files and report rows.
    pub fn name(self) -> &'static str {
        match self {
            ActionLabel::PickUpCup => "pickUpCup",
            ActionLabel::ShakeHands => "shakeHands",
            ActionLabel::StayIdle => "stayIdle",
        }
    }

    pub fn one_hot(self) -> [f64; NUM_CLASSES] {
        let mut v = [0.0; NUM_CLASSES];
        v[self.index()] = 1.0;
        v
    }

    pub fn brain_state(self) -> BrainState {
        match self {
            ActionLabel::PickUpCup => BrainState::ConcentratedCup,
            ActionLabel::ShakeHands => BrainState::RelaxedHandshake,
            ActionLabel::StayIdle => BrainState::Idle,
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "0" | "pickUpCup" | "pick_up_cup" => Ok(ActionLabel::PickUpCup),
            "1" | "shakeHands" | "shake_hands" => Ok(ActionLabel::ShakeHands),
            "2" | "stayIdle" | "stay_idle" => Ok(ActionLabel::StayIdle),
            other => Err(Error::Config(format!("unknown action label {other:?}"))),
        }
    }
}

/// Ground-truth mental state driving the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrainState {
    RelaxedHandshake,
    ConcentratedCup,
    Idle,
}

impl BrainState {
    pub const ALL: [BrainState; 3] = [BrainState::RelaxedHandshake, BrainState::ConcentratedCup, BrainState::Idle];

    pub fn action(self) -> ActionLabel {
        match self {
            BrainState::RelaxedHandshake => ActionLabel::ShakeHands,
            BrainState::ConcentratedCup => ActionLabel::PickUpCup,
            BrainState::Idle => ActionLabel::StayIdle,
        }
    }
}

impl From<BrainState> for ActionLabel {
    fn from(s: BrainState) -> Self {
        s.action()
    }
}
