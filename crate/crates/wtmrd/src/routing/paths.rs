use std::collections::HashSet;
use std::rc::Rc;

use crate::sim::node::NodeId;
use crate::sim::time::SimTime;

/// A reply path waiting for selection, tagged with its source-arrival time.
#[derive(Debug, Clone)]
pub struct CandidatePath {
    pub path: Rc<[NodeId]>,
    pub arrived: SimTime,
}

impl CandidatePath {
    pub fn hop_count(&self) -> u32 {
        (self.path.len() - 1) as u32
    }
}

/// The multipath route a flow sends on: up to `k` node-disjoint paths,
/// shortest first.
#[derive(Debug, Clone, Default)]
pub struct PathSet {
    pub paths: Vec<Rc<[NodeId]>>,
}

impl PathSet {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }
}

/// Greedy shortest-first selection of node-disjoint paths.
///
/// `candidates` must be in arrival order; selection considers them by
/// ascending hop count with arrival order breaking ties (the sort is stable).
/// A candidate is kept iff none of its intermediate nodes appear in an
/// already-kept path — endpoints are naturally shared. At most `k` paths are
/// returned.
pub fn select_paths(candidates: &[CandidatePath], k: usize) -> PathSet {
    if candidates.is_empty() || k == 0 {
        return PathSet::default();
    }
    let source = candidates[0].path[0];
    let dest = *candidates[0].path.last().unwrap();
    for c in candidates {
        assert!(c.path.len() >= 2, "candidate path must have two endpoints");
        assert_eq!(c.path[0], source, "candidates disagree on source");
        assert_eq!(*c.path.last().unwrap(), dest, "candidates disagree on destination");
    }

    let mut order: Vec<&CandidatePath> = candidates.iter().collect();
    order.sort_by_key(|c| c.path.len()); // stable: ties keep arrival order

    let mut used: HashSet<NodeId> = HashSet::new();
    let mut chosen: Vec<Rc<[NodeId]>> = Vec::new();
    for c in order {
        if chosen.len() == k {
            break;
        }
        let intermediates = &c.path[1..c.path.len() - 1];
        if intermediates.iter().any(|n| used.contains(n)) {
            continue;
        }
        if chosen.iter().any(|p| **p == *c.path) {
            continue; // exact duplicate (possible for the direct path)
        }
        used.extend(intermediates.iter().copied());
        chosen.push(Rc::clone(&c.path));
    }

    debug_assert!(pairwise_disjoint(&chosen), "selected paths share a relay");
    PathSet { paths: chosen }
}

/// True iff no intermediate node appears in two paths.
pub fn pairwise_disjoint(paths: &[Rc<[NodeId]>]) -> bool {
    let mut seen: HashSet<NodeId> = HashSet::new();
    for p in paths {
        for n in &p[1..p.len() - 1] {
            if !seen.insert(*n) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(path: &[NodeId], arrived: u64) -> CandidatePath {
        CandidatePath {
            path: Rc::from(path.to_vec()),
            arrived: SimTime(arrived),
        }
    }

    #[test]
    fn shortest_first_with_arrival_tiebreak() {
        // Slice order is arrival order: the longer path happened to arrive
        // first, and of the equal-length pair [0,1,9] arrived before [0,2,9].
        let candidates = vec![
            cand(&[0, 4, 5, 9], 10),
            cand(&[0, 1, 9], 11),
            cand(&[0, 2, 9], 12),
        ];
        let set = select_paths(&candidates, 3);
        let got: Vec<Vec<NodeId>> = set.paths.iter().map(|p| p.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1, 9], vec![0, 2, 9], vec![0, 4, 5, 9]]);
    }

    #[test]
    fn overlapping_candidates_are_skipped() {
        let candidates = vec![
            cand(&[0, 1, 2, 9], 1),
            cand(&[0, 3, 2, 9], 2), // shares relay 2
            cand(&[0, 4, 5, 9], 3),
        ];
        let set = select_paths(&candidates, 3);
        let got: Vec<Vec<NodeId>> = set.paths.iter().map(|p| p.to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1, 2, 9], vec![0, 4, 5, 9]]);
    }

    #[test]
    fn budget_caps_selection() {
        let candidates = vec![
            cand(&[0, 1, 9], 1),
            cand(&[0, 2, 9], 2),
            cand(&[0, 3, 9], 3),
            cand(&[0, 4, 9], 4),
        ];
        assert_eq!(select_paths(&candidates, 2).len(), 2);
    }

    #[test]
    fn direct_path_duplicates_collapse() {
        let candidates = vec![cand(&[0, 9], 1), cand(&[0, 9], 2), cand(&[0, 1, 9], 3)];
        let set = select_paths(&candidates, 3);
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn empty_candidates_give_empty_set() {
        assert!(select_paths(&[], 3).is_empty());
        assert!(select_paths(&[cand(&[0, 1, 9], 1)], 0).is_empty());
    }

    #[test]
    fn random_selections_are_always_disjoint() {
        use rand::seq::SliceRandom;
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut candidates = Vec::new();
            let n_candidates = rng.gen_range(1..10);
            for i in 0..n_candidates {
                let len = rng.gen_range(0..4);
                let mut mid: Vec<NodeId> = (1..9).collect();
                mid.shuffle(&mut rng);
                let mut path = vec![0u16];
                path.extend(&mid[..len]);
                path.push(9);
                candidates.push(cand(&path, i as u64));
            }
            let set = select_paths(&candidates, 3);
            assert!(pairwise_disjoint(&set.paths));
        }
    }

    #[test]
    #[should_panic(expected = "disagree on destination")]
    fn mixed_destinations_panic() {
        let candidates = vec![cand(&[0, 1, 9], 1), cand(&[0, 1, 8], 2)];
        select_paths(&candidates, 3);
    }
}
