//! Random-waypoint mobility with zero pause time.
//!
//! Each node travels toward its waypoint at its current leg speed; on
//! arrival it immediately draws a fresh uniform waypoint and a fresh uniform
//! speed in `[0, max_speed]`. Advancement is exact kinematics, not a per-tick
//! approximation: one tick may span several legs.

use rand::Rng;

use super::node::{NodeState, Position};

/// Square arena, `side` meters on an edge, origin at (0, 0).
#[derive(Debug, Clone, Copy)]
pub struct Arena {
    pub side: f64,
}

impl Arena {
    pub fn contains(&self, p: &Position) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.side && p.y <= self.side
    }

    pub fn random_position<R: Rng>(&self, rng: &mut R) -> Position {
        Position {
            x: rng.gen_range(0.0..=self.side),
            y: rng.gen_range(0.0..=self.side),
        }
    }
}

/// Move `node` through `dt_ms` of simulated time.
///
/// With `max_speed <= 0` the node is pinned (no randomness is consumed), so
/// static topologies replay identically regardless of tick count.
pub fn advance<R: Rng>(node: &mut NodeState, dt_ms: u64, arena: &Arena, max_speed: f64, rng: &mut R) {
    if max_speed <= 0.0 {
        return;
    }
    let mut remaining_s = dt_ms as f64 / 1000.0;
    while remaining_s > 0.0 {
        let dist = node.position.distance_to(&node.waypoint);
        if dist <= f64::EPSILON {
            node.waypoint = arena.random_position(rng);
            node.speed = rng.gen_range(0.0..=max_speed);
            if node.speed <= 0.0 {
                return; // parked on a zero-speed leg; the tick ends here
            }
            continue;
        }
        if node.speed <= 0.0 {
            return;
        }
        let travel = node.speed * remaining_s;
        if travel < dist {
            let frac = travel / dist;
            node.position.x += (node.waypoint.x - node.position.x) * frac;
            node.position.y += (node.waypoint.y - node.position.y) * frac;
            remaining_s = 0.0;
        } else {
            node.position = node.waypoint;
            remaining_s -= dist / node.speed;
        }
    }
    debug_assert!(arena.contains(&node.position), "node escaped the arena");
}
