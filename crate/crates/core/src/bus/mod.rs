//! Typed channels between layers and the append-only memory log.
//!
//! Channels are the only path between layers. Each has a fixed latency in
//! ticks and a seeded drop probability; the drop decision is made at send
//! time so a run can be replayed from its send log alone.

mod channel;
mod memory;

pub use channel::{Channel, ChannelConfig, ChannelStats, Envelope, Link, SendOutcome, SharedChannel};
pub use memory::{MemoryError, MemoryPayload, MemoryRecord, MemoryStore, Origin};
