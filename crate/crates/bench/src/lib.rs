//! Shared fixtures for the benchmarks.

use dfljam_core::fnn::LabeledData;
use dfljam_core::graph::{build_topology, LayoutParams, Topology, TopologyKind};
use dfljam_core::seed::{stream, Purpose};
use dfljam_core::signal::{build_datasets, to_labeled, ChannelParams, DatasetSizes, Datasets};

pub const SEED: u64 = 1;

pub fn topology(kind: TopologyKind) -> Topology {
    build_topology(
        kind,
        &LayoutParams::default(),
        &mut stream(SEED, Purpose::Topology, &[]),
    )
    .expect("layout")
}

pub fn datasets(topology: &Topology, train: usize) -> Datasets {
    build_datasets(
        topology,
        &ChannelParams::default(),
        DatasetSizes { train, test: 100 },
        SEED,
    )
    .expect("datasets")
}

/// Training set of node 0 on the line layout.
pub fn node_data(train: usize) -> LabeledData {
    to_labeled(&datasets(&topology(TopologyKind::Line), train).nodes[0].train)
}
