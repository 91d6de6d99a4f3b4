//! Deterministic discrete-event simulator for mobile ad-hoc networks under
//! packet-dropping attacks.
//!
//! The library is organised around a single-threaded event engine ([`engine`])
//! that composes:
//!
//! * [`sim`] — simulated time, the event queue, random-waypoint mobility and
//!   the binary-range radio model;
//! * [`trust`] — per-node behavioural trust from handshake probes and
//!   forwarding/drop counters, recomputed on fixed epochs;
//! * [`winnow`] — an online multiplicative-weight classifier over binarized
//!   trust features that labels nodes normal or malicious;
//! * [`routing`] — multipath RREQ/RREP route discovery restricted to
//!   normal-labelled nodes, with node-disjoint path selection;
//! * [`workload`] — scenario configuration, role assignment and CBR traffic;
//! * [`metrics`] — detection-rate, detection-time, delivery and delay reports
//!   recomputed from run transcripts.
//!
//! Every run is reproducible: all randomness flows from a master seed through
//! named [`sim::rng`] streams, and two runs with the same configuration and
//! seed emit byte-identical transcripts and reports (wall-clock classification
//! time excepted, which lives in its own column).

pub mod engine;
pub mod metrics;
pub mod routing;
pub mod sim;
pub mod sweep;
pub mod transcript;
pub mod trust;
pub mod variant;
pub mod winnow;
pub mod workload;

pub use engine::{run_scenario, RunError, RunOutput};
pub use sim::time::SimTime;
pub use variant::VariantSpec;
pub use workload::ScenarioConfig;
