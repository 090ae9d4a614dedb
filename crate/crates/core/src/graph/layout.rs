use rand::Rng;

use super::{Position, Topology, TopologyKind};
use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLE_CAP: usize = 10_000;

/// Parameters for generated layouts. The fixed layouts (line, star, grid,
/// ring) only read `comm_range` and `spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub comm_range: f64,
    /// Distance between adjacent nodes of the fixed layouts.
    pub spacing: f64,
    pub random_nodes: usize,
    /// Random nodes are drawn uniformly in `[area_min, area_max]²`.
    pub area_min: f64,
    pub area_max: f64,
    pub resample_cap: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            comm_range: 200.0,
            spacing: 200.0,
            random_nodes: 20,
            area_min: 200.0,
            area_max: 1000.0,
            resample_cap: DEFAULT_RESAMPLE_CAP,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.comm_range.is_finite() && self.comm_range > 0.0) {
            return Err(Error::config("comm_range", "must be positive and finite"));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::config("spacing", "must be positive and finite"));
        }
        if self.random_nodes == 0 {
            return Err(Error::config("random_nodes", "must be at least 1"));
        }
        if !(self.area_min < self.area_max) {
            return Err(Error::config("area_min", "must be below area_max"));
        }
        Ok(())
    }
}

/// Builds one of the generated layouts.
///
/// Node numbering:
/// - line: `(s·i, 3s)` for `i = 1..=5`, ids 0..4.
/// - star: the horizontal arm `(s·i, 3s)` for `i = 1..=5` (ids 0..4, centre
///   is id 2), then the vertical arm `(3s, s·i)` for `i ∈ {1,2,4,5}` (ids 5..8).
/// - grid: `(s·i, s·j)` for `i, j ∈ 1..=5`, id `5(i-1) + (j-1)`.
/// - ring: the grid's 16 boundary nodes, renumbered in grid order.
/// - random: `random_nodes` uniform points, resampled as a whole until the
///   induced graph is connected.
pub fn build_topology<R: Rng + ?Sized>(kind: TopologyKind, params: &LayoutParams, rng: &mut R) -> Result<Topology> {
    params.validate()?;
    let s = params.spacing;
    let positions = match kind {
        TopologyKind::Line => (1..=5).map(|i| Position::new(s * i as f64, 3.0 * s)).collect(),
        TopologyKind::Star => {
            let mut p: Vec<Position> = (1..=5).map(|i| Position::new(s * i as f64, 3.0 * s)).collect();
            p.extend([1, 2, 4, 5].map(|i| Position::new(3.0 * s, s * i as f64)));
            p
        }
        TopologyKind::Grid => grid(s).collect(),
        TopologyKind::Ring => grid(s)
            .filter(|p| {
                let on_edge = |c: f64| c == s || c == 5.0 * s;
                on_edge(p.x) || on_edge(p.y)
            })
            .collect(),
        TopologyKind::Random => return random_layout(params, rng),
        TopologyKind::Explicit => {
            return Err(Error::config(
                "topology",
                "explicit topologies are loaded from a file, not generated",
            ))
        }
    };
    let topo = Topology::from_positions(kind, positions, params.comm_range)?;
    if !topo.is_connected() {
        return Err(Error::InvalidTopology(format!(
            "{kind} layout is disconnected at range {}",
            params.comm_range
        )));
    }
    Ok(topo)
}

fn grid(s: f64) -> impl Iterator<Item = Position> {
    (1..=5).flat_map(move |i| (1..=5).map(move |j| Position::new(s * i as f64, s * j as f64)))
}

fn random_layout<R: Rng + ?Sized>(params: &LayoutParams, rng: &mut R) -> Result<Topology> {
    for _ in 0..params.resample_cap {
        let positions = (0..params.random_nodes)
            .map(|_| {
                Position::new(
                    rng.random_range(params.area_min..=params.area_max),
                    rng.random_range(params.area_min..=params.area_max),
                )
            })
            .collect();
        let topo = Topology::from_positions(TopologyKind::Random, positions, params.comm_range)?;
        if topo.is_connected() {
            return Ok(topo);
        }
    }
    Err(Error::TopologyGeneration {
        attempts: params.resample_cap,
    })
}
