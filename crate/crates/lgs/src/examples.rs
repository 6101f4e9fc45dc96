//! Bundled example presentations.

use crate::system::{from_labeled_graph, LabeledGraph, Lgs};
use crate::text::parse_graph;

pub const FULL2: &str = include_str!("../data/full2.graph");
pub const GOLDEN: &str = include_str!("../data/golden.graph");
pub const EVEN: &str = include_str!("../data/even.graph");
pub const LOOP: &str = include_str!("../data/loop.graph");
pub const GOLDEN2: &str = include_str!("../data/golden2.graph");
pub const FULL3: &str = include_str!("../data/full3.graph");
pub const MARKED3: &str = include_str!("../data/marked3.graph");

fn graph(name: &str, text: &str) -> LabeledGraph {
    parse_graph(name, text).expect("bundled graph parses")
}

pub fn full2_graph() -> LabeledGraph {
    graph("full2.graph", FULL2)
}

pub fn golden_graph() -> LabeledGraph {
    graph("golden.graph", GOLDEN)
}

pub fn even_graph() -> LabeledGraph {
    graph("even.graph", EVEN)
}

pub fn loop_graph() -> LabeledGraph {
    graph("loop.graph", LOOP)
}

pub fn golden2_graph() -> LabeledGraph {
    graph("golden2.graph", GOLDEN2)
}

pub fn full3_graph() -> LabeledGraph {
    graph("full3.graph", FULL3)
}

pub fn marked3_graph() -> LabeledGraph {
    graph("marked3.graph", MARKED3)
}

pub fn full2(depth: usize) -> Lgs {
    from_labeled_graph(&full2_graph(), depth).unwrap()
}

pub fn golden(depth: usize) -> Lgs {
    from_labeled_graph(&golden_graph(), depth).unwrap()
}

pub fn even(depth: usize) -> Lgs {
    from_labeled_graph(&even_graph(), depth).unwrap()
}

pub fn single_loop(depth: usize) -> Lgs {
    from_labeled_graph(&loop_graph(), depth).unwrap()
}

pub fn golden2(depth: usize) -> Lgs {
    from_labeled_graph(&golden2_graph(), depth).unwrap()
}

pub fn full3(depth: usize) -> Lgs {
    from_labeled_graph(&full3_graph(), depth).unwrap()
}

pub fn marked3(depth: usize) -> Lgs {
    from_labeled_graph(&marked3_graph(), depth).unwrap()
}

/// The three reference systems: full 2-shift, golden mean, even shift.
pub fn reference_systems(depth: usize) -> Vec<Lgs> {
    vec![full2(depth), golden(depth), even(depth)]
}
