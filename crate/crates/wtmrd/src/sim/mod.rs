//! Simulation substrate: time, events, randomness, nodes, mobility, radio.

pub mod event;
pub mod mobility;
pub mod node;
pub mod radio;
pub mod rng;
pub mod time;

pub use event::{EventKind, EventQueue, ScheduleError, SimEvent};
pub use node::{NodeId, NodeState, PacketCounters, Position, Role};
pub use time::SimTime;
