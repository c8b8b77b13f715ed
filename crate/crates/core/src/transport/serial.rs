use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::label::ActionLabel;

/// One ASCII digit, `'0'..='2'`, per action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionByte(u8);

impl ActionByte {
    pub fn byte(self) -> u8 {
        self.0
    }

    pub fn label(self) -> ActionLabel {
        ActionLabel::from_index((self.0 - b'0') as usize).expect("validated on construction")
    }
}

impl From<ActionLabel> for ActionByte {
    fn from(a: ActionLabel) -> Self {
        ActionByte(b'0' + a.index() as u8)
    }
}

impl TryFrom<u8> for ActionByte {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        match b {
            b'0'..=b'2' => Ok(ActionByte(b)),
            other => Err(Error::Protocol(other)),
        }
    }
}

/// Simulated serial line: an in-process ordered byte pipe where each byte
/// becomes readable `latency` after it was written.
pub fn serial_link(latency: Duration) -> (SerialTx, SerialRx) {
    let (tx, rx) = mpsc::channel();
    (SerialTx { tx, latency }, SerialRx { rx, pending: None, protocol_errors: 0 })
}

#[derive(Debug, Clone)]
pub struct SerialTx {
    tx: Sender<(Instant, u8)>,
    latency: Duration,
}

impl SerialTx {
    pub fn write_byte(&self, b: u8) -> Result<()> {
        self.tx
            .send((Instant::now() + self.latency, b))
            .map_err(|_| Error::Transport(std::io::Error::from(std::io::ErrorKind::BrokenPipe)))
    }

    pub fn send_action(&self, a: ActionLabel) -> Result<()> {
        self.write_byte(ActionByte::from(a).byte())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecvAction {
    Action(ActionLabel),
    /// Unknown byte; counted and otherwise ignored.
    Invalid(u8),
    Timeout,
    Closed,
}

#[derive(Debug)]
pub struct SerialRx {
    rx: Receiver<(Instant, u8)>,
    pending: Option<(Instant, u8)>,
    protocol_errors: u64,
}

impl SerialRx {
    pub fn protocol_errors(&self) -> u64 {
        self.protocol_errors
    }

    /// `Ok(None)` on timeout, `Err` once the sender is gone and drained.
    pub fn read_byte(&mut self, timeout: Duration) -> std::result::Result<Option<u8>, RecvTimeoutError> {
        let deadline = Instant::now() + timeout;
        let (due, b) = match self.pending.take() {
            Some(p) => p,
            None => match self.rx.recv_timeout(timeout) {
                Ok(p) => p,
                Err(RecvTimeoutError::Timeout) => return Ok(None),
                Err(e) => return Err(e),
            },
        };
        let now = Instant::now();
        if due > now {
            if due > deadline {
                self.pending = Some((due, b));
                std::thread::sleep(deadline.saturating_duration_since(now));
                return Ok(None);
            }
            std::thread::sleep(due - now);
        }
        Ok(Some(b))
    }

    pub fn recv_action_timeout(&mut self, timeout: Duration) -> RecvAction {
        match self.read_byte(timeout) {
            Ok(Some(b)) => match ActionByte::try_from(b) {
                Ok(ab) => RecvAction::Action(ab.label()),
                Err(_) => {
                    self.protocol_errors += 1;
                    RecvAction::Invalid(b)
                }
            },
            Ok(None) => RecvAction::Timeout,
            Err(_) => RecvAction::Closed,
        }
    }

    /// Blocks for the next byte. Unknown bytes are counted and returned as
    /// a protocol error.
    pub fn recv_action(&mut self) -> Result<ActionLabel> {
        loop {
            match self.recv_action_timeout(Duration::from_secs(3600)) {
                RecvAction::Action(a) => return Ok(a),
                RecvAction::Invalid(b) => return Err(Error::Protocol(b)),
                RecvAction::Timeout => continue,
                RecvAction::Closed => {
                    return Err(Error::Transport(std::io::Error::from(std::io::ErrorKind::BrokenPipe)))
                }
            }
        }
    }
}
