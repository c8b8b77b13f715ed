//! Wire formats and links: UDP feature frames and the one-byte action
//! protocol to the arm controller.

mod codec;
mod serial;
mod udp;

pub use codec::{decode_frame, encode_frame, format_sig9, FeatureFrame, MAX_DATAGRAM};
pub use serial::{serial_link, ActionByte, RecvAction, SerialRx, SerialTx};
pub use udp::{stream_producer, FrameConsumer, FrameProducer, LossStats, ProducerStats};
