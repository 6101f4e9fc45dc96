//! Seeded random systems for fuzzing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::system::{canonical_lgs, from_labeled_graph, Alphabet, LabeledGraph, Lgs};

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// A strongly connected, left-resolving labeled graph with at most
/// `max_states` states over an alphabet of `symbols` letters.
pub fn random_graph(seed: u64, max_states: usize, symbols: usize) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph_with(&mut rng, max_states, symbols)
}

pub fn random_graph_with(rng: &mut ChaCha8Rng, max_states: usize, symbols: usize) -> LabeledGraph {
    let symbols = symbols.clamp(1, NAMES.len());
    let n = rng.gen_range(1..=max_states.max(1));
    let alphabet = Alphabet::new(NAMES[..symbols].iter().copied()).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut taken = std::collections::BTreeSet::new();
    for k in 0..n {
        let (s, t) = (order[k], order[(k + 1) % n]);
        let a = rng.gen_range(0..symbols);
        taken.insert((t, a));
        edges.push((s, a, t));
    }
    let extra = rng.gen_range(0..=n * symbols);
    for _ in 0..extra {
        let (s, a, t) = (rng.gen_range(0..n), rng.gen_range(0..symbols), rng.gen_range(0..n));
        if taken.insert((t, a)) {
            edges.push((s, a, t));
        }
    }
    LabeledGraph::new(
        format!("g{n}"),
        alphabet,
        (1..=n).map(|i| i.to_string()).collect(),
        edges,
    )
    .unwrap()
}

/// A valid left-resolving system of the given depth: the past-set
/// presentation of a random graph when its window suffices, otherwise the
/// graph expanded level by level.
pub fn random_lgs(seed: u64, depth: usize) -> Lgs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = rng.gen_range(1..=3);
    let g = random_graph_with(&mut rng, 4, symbols);
    if rng.gen_bool(0.5) {
        if let Ok(s) = canonical_lgs(&g, depth, depth + 4) {
            return s;
        }
    }
    from_labeled_graph(&g, depth).unwrap()
}
