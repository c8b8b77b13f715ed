use std::io::ErrorKind;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::codec::{decode_frame, encode_frame, FeatureFrame, MAX_DATAGRAM};
use crate::dsp::FeatureVector;
use crate::error::{Error, Result};

/// Counters kept by [`FrameConsumer`]. The frame index is the only
/// ordering signal: a forward jump counts the skipped indices as gaps, a
/// backward (or repeated) index counts as one reorder.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossStats {
    pub received: u64,
    pub gaps: u64,
    pub reorders: u64,
    pub format_errors: u64,
}

impl LossStats {
    /// Gaps not later filled by a reordered frame.
    pub fn net_lost(&self) -> u64 {
        self.gaps.saturating_sub(self.reorders)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProducerStats {
    pub sent: u64,
    /// Datagrams the OS refused without blocking (send buffer full).
    pub dropped: u64,
}

/// Fire-and-forget UDP sender. The socket is non-blocking; a full send
/// buffer drops the frame instead of stalling the producer.
#[derive(Debug)]
pub struct FrameProducer {
    socket: UdpSocket,
    target: SocketAddr,
    stats: ProducerStats,
}

impl FrameProducer {
    pub fn connect(target: impl ToSocketAddrs) -> Result<Self> {
        let target = target
            .to_socket_addrs()
            .map_err(Error::Transport)?
            .next()
            .ok_or_else(|| Error::Config("endpoint resolved to no address".into()))?;
        let bind: SocketAddr = if target.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" }.parse().unwrap();
        let socket = UdpSocket::bind(bind).map_err(Error::Transport)?;
        socket.set_nonblocking(true).map_err(Error::Transport)?;
        Ok(Self { socket, target, stats: ProducerStats::default() })
    }

    pub fn stats(&self) -> ProducerStats {
        self.stats
    }

    /// Returns `false` if the datagram was dropped locally.
    pub fn send(&mut self, frame: &FeatureFrame) -> Result<bool> {
        let payload = encode_frame(frame)?;
        self.send_raw(&payload)
    }

    pub fn send_raw(&mut self, payload: &[u8]) -> Result<bool> {
        match self.socket.send_to(payload, self.target) {
            Ok(_) => {
                self.stats.sent += 1;
                Ok(true)
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => {
                self.stats.dropped += 1;
                Ok(false)
            }
            // loopback reports an unbound peer as ConnectionRefused on some platforms
            Err(e) if e.kind() == ErrorKind::ConnectionRefused => {
                self.stats.dropped += 1;
                Ok(false)
            }
            Err(e) => Err(Error::Transport(e)),
        }
    }
}

/// Sends `features` to `endpoint` at `rate` frames per second, paced
/// against absolute deadlines so per-frame jitter does not accumulate.
pub fn stream_producer<I>(features: I, endpoint: impl ToSocketAddrs, rate: f64) -> Result<ProducerStats>
where
    I: IntoIterator<Item = FeatureVector>,
{
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Config(format!("invalid frame rate {rate}")));
    }
    let mut producer = FrameProducer::connect(endpoint)?;
    let period = Duration::from_secs_f64(1.0 / rate);
    let start = Instant::now();
    for (k, fv) in features.into_iter().enumerate() {
        let due = start + period * k as u32;
        let now = Instant::now();
        if due > now {
            std::thread::sleep(due - now);
        }
        producer.send(&FeatureFrame::from(&fv))?;
    }
    Ok(producer.stats())
}

#[derive(Debug)]
pub struct FrameConsumer {
    socket: UdpSocket,
    stats: LossStats,
    highest: Option<u64>,
    buf: Box<[u8; MAX_DATAGRAM]>,
}

impl FrameConsumer {
    pub fn bind(addr: impl ToSocketAddrs) -> Result<Self> {
        let socket = UdpSocket::bind(addr).map_err(Error::Transport)?;
        Ok(Self { socket, stats: LossStats::default(), highest: None, buf: Box::new([0; MAX_DATAGRAM]) })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        self.socket.local_addr().map_err(Error::Transport)
    }

    pub fn stats(&self) -> LossStats {
        self.stats
    }

    /// Updates the counters for one datagram and returns the frame if it
    /// decoded. Malformed payloads bump `format_errors` and are dropped.
    pub fn ingest(&mut self, payload: &[u8]) -> Option<FeatureFrame> {
        let frame = match decode_frame(payload) {
            Ok(f) => f,
            Err(e) => {
                debug!("dropping datagram: {e}");
                self.stats.format_errors += 1;
                return None;
            }
        };
        self.stats.received += 1;
        match self.highest {
            None => {
                self.stats.gaps += frame.index;
                self.highest = Some(frame.index);
            }
            Some(h) if frame.index > h => {
                self.stats.gaps += frame.index - h - 1;
                self.highest = Some(frame.index);
            }
            Some(_) => self.stats.reorders += 1,
        }
        Some(frame)
    }

    /// Waits up to `timeout` for the next datagram. `Ok(None)` on timeout
    /// or when the datagram was malformed.
    pub fn recv_timeout(&mut self, timeout: Duration) -> Result<Option<FeatureFrame>> {
        self.socket.set_read_timeout(Some(timeout.max(Duration::from_micros(1)))).map_err(Error::Transport)?;
        match self.socket.recv_from(&mut self.buf[..]) {
            Ok((n, _)) => {
                let payload = self.buf[..n].to_vec();
                Ok(self.ingest(&payload))
            }
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => Ok(None),
            Err(e) => {
                warn!("udp receive failed: {e}");
                Err(Error::Transport(e))
            }
        }
    }

    /// Collects frames until no datagram arrives for `idle`.
    pub fn drain_until_idle(&mut self, idle: Duration) -> Result<Vec<FeatureFrame>> {
        let mut out = Vec::new();
        let mut last = Instant::now();
        loop {
            if let Some(f) = self.recv_timeout(idle)? {
                out.push(f);
                last = Instant::now();
            } else if last.elapsed() >= idle {
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::FEATURE_DIM;

    fn frame(index: u64) -> FeatureFrame {
        FeatureFrame { index, values: [index as f64 / 7.0; FEATURE_DIM] }
    }

    fn payload(index: u64) -> Vec<u8> {
        encode_frame(&frame(index)).unwrap()
    }

    #[test]
    fn counts_gaps_and_reorders_from_indices() {
        let mut c = FrameConsumer::bind("127.0.0.1:0").unwrap();
        for i in [0, 1, 3, 2, 4, 8] {
            assert!(c.ingest(&payload(i)).is_some());
        }
        let s = c.stats();
        assert_eq!(s.received, 6);
        assert_eq!(s.gaps, 1 + 3);
        assert_eq!(s.reorders, 1);
        assert_eq!(s.net_lost(), 3);
    }

    #[test]
    fn leading_gap_counts_from_zero() {
        let mut c = FrameConsumer::bind("127.0.0.1:0").unwrap();
        c.ingest(&payload(3));
        assert_eq!(c.stats().gaps, 3);
    }

    #[test]
    fn malformed_datagram_counts_once() {
        let mut c = FrameConsumer::bind("127.0.0.1:0").unwrap();
        assert!(c.ingest(b"1,2,3").is_none());
        assert!(c.ingest(b"").is_none());
        let s = c.stats();
        assert_eq!((s.format_errors, s.received, s.gaps, s.reorders), (2, 0, 0, 0));
    }

    #[test]
    fn loopback_delivery() {
        let mut c = FrameConsumer::bind("127.0.0.1:0").unwrap();
        let mut p = FrameProducer::connect(c.local_addr().unwrap()).unwrap();
        for i in 0..10 {
            assert!(p.send(&frame(i)).unwrap());
        }
        let got = c.drain_until_idle(Duration::from_millis(200)).unwrap();
        assert_eq!(got.len(), 10);
        assert_eq!(got[4], decode_frame(&payload(4)).unwrap());
        assert_eq!(c.stats().gaps, 0);
    }

    #[test]
    fn recv_times_out_quietly() {
        let mut c = FrameConsumer::bind("127.0.0.1:0").unwrap();
        assert!(c.recv_timeout(Duration::from_millis(10)).unwrap().is_none());
    }
}
