//! Simulation and attack planning for decentralized federated learning over
//! multi-hop wireless networks whose links can be jammed.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod dfl;
pub mod error;
pub mod fnn;
pub mod graph;
pub mod report;
pub mod seed;
pub mod signal;

pub use attack::{Algorithm, AttackPlan, JammerPlacement, Scenario};
pub use dfl::{ConvergenceConfig, ConvergenceTime, Experiment, ExperimentResult, RoundMetrics};
pub use error::{Error, Result};
pub use fnn::{FnnSpec, ModelParams, TrainConfig};
pub use graph::{DirectedLink, Link, NodeId, Position, Topology, TopologyKind};
pub use report::{ComparisonTable, Format, SummaryRow};
pub use signal::{ChannelParams, DatasetSizes, ModScheme};
