//! Binary-range radio model: two nodes hear each other iff they are within
//! `range` meters. Neighbor sets are rebuilt from positions with uniform-grid
//! binning, which is exact (same predicate as the all-pairs scan) but linear
//! in practice.

use super::node::{NodeId, Position};

/// Snapshot of every node's neighbor set, sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborIndex {
    sets: Vec<Vec<NodeId>>,
}

impl NeighborIndex {
    pub fn build(positions: &[Position], range: f64) -> Self {
        assert!(range > 0.0, "radio range must be positive");
        let n = positions.len();
        let mut sets = vec![Vec::new(); n];
        if n == 0 {
            return NeighborIndex { sets };
        }
        // Bin nodes into range-sized cells; candidates live in the 3x3 block.
        let inv = 1.0 / range;
        let cell_of = |p: &Position| -> (i64, i64) {
            ((p.x * inv).floor() as i64, (p.y * inv).floor() as i64)
        };
        let mut grid: std::collections::HashMap<(i64, i64), Vec<NodeId>> =
            std::collections::HashMap::new();
        for (i, p) in positions.iter().enumerate() {
            grid.entry(cell_of(p)).or_default().push(i as NodeId);
        }
        for (i, p) in positions.iter().enumerate() {
            let (cx, cy) = cell_of(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                        continue;
                    };
                    for &j in bucket {
                        if j as usize != i && p.distance_to(&positions[j as usize]) <= range {
                            sets[i].push(j);
                        }
                    }
                }
            }
            sets[i].sort_unstable();
        }
        NeighborIndex { sets }
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.sets
            .get(id as usize)
            .unwrap_or_else(|| panic!("neighbor query for unknown node {id}"))
    }

    pub fn are_neighbors(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::mobility::Arena;
    use crate::sim::rng::{stream, Domain};

    /// Reference implementation: all-pairs distance scan.
    fn brute_force(positions: &[Position], range: f64) -> Vec<Vec<NodeId>> {
        let n = positions.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && positions[i].distance_to(&positions[j]) <= range)
                    .map(|j| j as NodeId)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matches_all_pairs_oracle_on_random_layouts() {
        let arena = Arena { side: 1200.0 };
        for seed in 0..20u64 {
            let mut rng = stream(seed, Domain::Placement, 0);
            let positions: Vec<Position> =
                (0..80).map(|_| arena.random_position(&mut rng)).collect();
            let index = NeighborIndex::build(&positions, 250.0);
            let oracle = brute_force(&positions, 250.0);
            for i in 0..positions.len() {
                assert_eq!(index.neighbors(i as NodeId), &oracle[i][..], "node {i}, seed {seed}");
            }
        }
    }

    #[test]
    fn symmetry() {
        let arena = Arena { side: 500.0 };
        let mut rng = stream(4, Domain::Placement, 0);
        let positions: Vec<Position> = (0..40).map(|_| arena.random_position(&mut rng)).collect();
        let index = NeighborIndex::build(&positions, 150.0);
        for a in 0..40u16 {
            for &b in index.neighbors(a) {
                assert!(index.are_neighbors(b, a), "asymmetric link {a}<->{b}");
            }
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let positions = vec![
            Position { x: 0.0, y: 0.0 },
            Position { x: 250.0, y: 0.0 },
            Position { x: 250.1, y: 0.0 },
        ];
        let index = NeighborIndex::build(&positions, 250.0);
        assert!(index.are_neighbors(0, 1));
        assert!(!index.are_neighbors(0, 2));
    }

    #[test]
    #[should_panic(expected = "unknown node")]
    fn unknown_id_panics() {
        let index = NeighborIndex::build(&[Position { x: 0.0, y: 0.0 }], 10.0);
        index.neighbors(5);
    }
}
