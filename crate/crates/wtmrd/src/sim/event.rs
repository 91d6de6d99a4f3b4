use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use thiserror::Error;

use super::node::NodeId;
use super::time::SimTime;

/// Identifier of a traffic flow, dense from zero.
pub type FlowId = u16;

/// What the engine does when an event fires.
#[derive(Debug, Clone)]
pub enum EventKind {
    /// Advance every node along its waypoint leg and refresh neighbor sets.
    MobilityTick,
    /// A flow originates one data packet (sequence numbers start at 1).
    TrafficGen { flow: FlowId, seq: u32 },
    /// A pending route discovery window for `flow` closes: install the
    /// selected paths and send whatever the flow queued while waiting.
    PacketSend { flow: FlowId },
    /// A data packet reaches `path[hop]` and must be consumed or relayed.
    PacketArrival {
        flow: FlowId,
        seq: u32,
        path: Rc<[NodeId]>,
        hop: u8,
        origin: SimTime,
    },
    /// Handshake probes sent at the epoch boundary time out; trust records
    /// are computed from whatever replies arrived.
    HandshakeTimeout { epoch: u32 },
    /// Epoch boundary: send handshake probes, then classify at the timeout.
    TrustEpoch { epoch: u32 },
    /// End of simulated time.
    SimEnd,
}

/// An event drawn from the queue.
#[derive(Debug, Clone)]
pub struct SimEvent<T = EventKind> {
    pub time: SimTime,
    /// Monotone insertion counter; equal-time events fire in FIFO order.
    pub seq: u64,
    pub kind: T,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("event scheduled at {at} before current time {now}")]
    InPast { at: SimTime, now: SimTime },
}

struct Entry<T> {
    time: SimTime,
    seq: u64,
    kind: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the std max-heap pops the earliest (time, seq) first.
impl<T> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Priority queue of timed events with FIFO tie-breaking.
///
/// `pop` never yields an event earlier than the last one popped; `schedule`
/// rejects events in the simulated past. Together these give a total,
/// reproducible event order.
pub struct EventQueue<T = EventKind> {
    heap: BinaryHeap<Entry<T>>,
    next_seq: u64,
    now: SimTime,
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: SimTime::ZERO,
        }
    }

    /// Current simulated time: the timestamp of the last popped event.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Move the clock forward without an event (e.g. to align a nested
    /// queue with an outer one). Never moves backwards.
    pub fn advance_to(&mut self, at: SimTime) {
        assert!(
            self.heap.is_empty() || at <= self.heap.peek().map(|e| e.time).unwrap(),
            "advance_to would skip pending events"
        );
        if at > self.now {
            self.now = at;
        }
    }

    pub fn schedule(&mut self, at: SimTime, kind: T) -> Result<u64, ScheduleError> {
        if at < self.now {
            return Err(ScheduleError::InPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time: at, seq, kind });
        Ok(seq)
    }

    /// Schedule `delay` milliseconds after the current time.
    pub fn schedule_in(&mut self, delay: u64, kind: T) -> u64 {
        self.schedule(self.now + delay, kind)
            .expect("delay-relative schedule cannot be in the past")
    }

    pub fn pop(&mut self) -> Option<SimEvent<T>> {
        let entry = self.heap.pop()?;
        assert!(
            entry.time >= self.now,
            "event queue delivered time {} after clock already at {}",
            entry.time,
            self.now
        );
        self.now = entry.time;
        Some(SimEvent {
            time: entry.time,
            seq: entry.seq,
            kind: entry.kind,
        })
    }
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}
