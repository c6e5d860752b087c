use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use crate::Tick;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub latency: u64,
    pub drop_probability: f64,
}

impl ChannelConfig {
    pub fn with_latency(latency: u64) -> Self {
        Self { latency, drop_probability: 0.0 }
    }
}

/// A message in flight or just delivered.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope<T> {
    pub id: u64,
    pub sent_tick: Tick,
    pub deliver_tick: Tick,
    pub msg: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SendOutcome {
    Queued { id: u64, deliver_tick: Tick },
    Dropped { id: u64 },
}

impl SendOutcome {
    pub fn id(&self) -> u64 {
        match *self {
            SendOutcome::Queued { id, .. } | SendOutcome::Dropped { id } => id,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

/// Sending and receiving ends of a channel, as seen by a layer.
pub trait Link<T> {
    fn name(&self) -> &str;
    fn transmit(&mut self, msg: T, now: Tick) -> SendOutcome;
    fn poll(&mut self, now: Tick) -> Vec<Envelope<T>>;
}

/// Single-context channel with latency and seeded drops.
#[derive(Debug)]
pub struct Channel<T> {
    name: String,
    config: ChannelConfig,
    rng: ChaCha8Rng,
    queue: VecDeque<Envelope<T>>,
    next_id: u64,
    stats: ChannelStats,
}

impl<T> Channel<T> {
    /// `stream` selects an independent RNG stream so channels sharing a
    /// seed do not share drop decisions.
    pub fn new(name: impl Into<String>, config: ChannelConfig, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            name: name.into(),
            config,
            rng,
            queue: VecDeque::new(),
            next_id: 0,
            stats: ChannelStats::default(),
        }
    }

    pub fn config(&self) -> ChannelConfig {
        self.config
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn should_drop(&mut self) -> bool {
        let p = self.config.drop_probability;
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.rng.random::<f64>() < p
        }
    }
}

impl<T> Link<T> for Channel<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn transmit(&mut self, msg: T, now: Tick) -> SendOutcome {
        let id = self.next_id;
        self.next_id += 1;
        self.stats.sent += 1;
        if self.should_drop() {
            self.stats.dropped += 1;
            return SendOutcome::Dropped { id };
        }
        let deliver_tick = now + self.config.latency;
        // Stable insert: after every message due at or before this one.
        let at = self.queue.partition_point(|e| e.deliver_tick <= deliver_tick);
        self.queue.insert(at, Envelope { id, sent_tick: now, deliver_tick, msg });
        SendOutcome::Queued { id, deliver_tick }
    }

    fn poll(&mut self, now: Tick) -> Vec<Envelope<T>> {
        let due = self.queue.partition_point(|e| e.deliver_tick <= now);
        self.stats.delivered += due as u64;
        self.queue.drain(..due).collect()
    }
}

/// Channel handle that can cross execution contexts (one producer, one
/// consumer). Clones share the same queue.
#[derive(Debug)]
pub struct SharedChannel<T> {
    name: String,
    inner: Arc<Mutex<Channel<T>>>,
}

impl<T> Clone for SharedChannel<T> {
    fn clone(&self) -> Self {
        Self { name: self.name.clone(), inner: Arc::clone(&self.inner) }
    }
}

impl<T> SharedChannel<T> {
    pub fn new(channel: Channel<T>) -> Self {
        Self { name: channel.name.clone(), inner: Arc::new(Mutex::new(channel)) }
    }

    pub fn stats(&self) -> ChannelStats {
        self.inner.lock().expect("channel lock poisoned").stats()
    }
}

impl<T> Link<T> for SharedChannel<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn transmit(&mut self, msg: T, now: Tick) -> SendOutcome {
        self.inner.lock().expect("channel lock poisoned").transmit(msg, now)
    }

    fn poll(&mut self, now: Tick) -> Vec<Envelope<T>> {
        self.inner.lock().expect("channel lock poisoned").poll(now)
    }
}
