#![allow(dead_code)]

use dfljam_core::graph::{Link, Position, Topology};
use proptest::prelude::*;

/// Connected graph on `4..=max_nodes` nodes: a random spanning tree plus a
/// random subset of the remaining pairs. Positions lie on a circle.
pub fn connected_graph(max_nodes: usize) -> impl Strategy<Value = Topology> {
    (4..=max_nodes)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            let extras = proptest::collection::vec(proptest::bool::weighted(0.3), n * (n - 1) / 2);
            (Just(n), parents, extras)
        })
        .prop_map(|(n, parents, extras)| {
            let mut links: Vec<Link> = parents.iter().enumerate().map(|(i, &p)| Link::new(i + 1, p)).collect();
            let mut k = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    if extras[k] {
                        links.push(Link::new(a, b));
                    }
                    k += 1;
                }
            }
            let positions = (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64 * std::f64::consts::TAU;
                    Position::new(500.0 * t.cos(), 500.0 * t.sin())
                })
                .collect();
            Topology::with_links(positions, 200.0, links).unwrap()
        })
}
