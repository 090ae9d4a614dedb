//! Wireless topologies and the graph algorithms attack planning relies on.
//!
//! Nodes are dense indices `0..N`. A [`Topology`] owns node positions and the
//! undirected link set; [`DirectedView`] exposes the same links as arcs in
//! both orientations.

mod flow;
mod io;
mod layout;
mod mincut;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::TopologyFile;
pub use layout::{build_topology, LayoutParams, DEFAULT_RESAMPLE_CAP};
pub use mincut::{
    brute_force_min_cut, global_min_cut_directed, global_min_cut_undirected, CutResult, DirectedCutResult,
    BRUTE_FORCE_CAP,
};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Position) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn midpoint(&self, other: &Position) -> Position {
        Position::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Position {
    fn from([x, y]: [f64; 2]) -> Self {
        Position { x, y }
    }
}

impl From<Position> for [f64; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

/// An undirected link, stored with its smaller endpoint first so that the
/// derived ordering is lexicographic on (min endpoint, max endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[NodeId; 2]", into = "[NodeId; 2]")]
pub struct Link {
    lo: NodeId,
    hi: NodeId,
}

impl Link {
    /// Panics on a self-link.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert_ne!(a, b, "self-link at node {a}");
        Link {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(&self) -> NodeId {
        self.lo
    }

    pub fn hi(&self) -> NodeId {
        self.hi
    }

    pub fn touches(&self, v: NodeId) -> bool {
        self.lo == v || self.hi == v
    }

    pub fn other(&self, v: NodeId) -> NodeId {
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }
}

impl TryFrom<[NodeId; 2]> for Link {
    type Error = String;

    fn try_from([a, b]: [NodeId; 2]) -> std::result::Result<Self, String> {
        if a == b {
            Err(format!("self-link at node {a}"))
        } else {
            Ok(Link::new(a, b))
        }
    }
}

impl From<Link> for [NodeId; 2] {
    fn from(l: Link) -> Self {
        [l.lo, l.hi]
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// A transmitter→receiver arc. Ordered by (tx, rx).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[NodeId; 2]", into = "[NodeId; 2]")]
pub struct DirectedLink {
    pub tx: NodeId,
    pub rx: NodeId,
}

impl DirectedLink {
    pub const fn new(tx: NodeId, rx: NodeId) -> Self {
        DirectedLink { tx, rx }
    }
}

impl From<[NodeId; 2]> for DirectedLink {
    fn from([tx, rx]: [NodeId; 2]) -> Self {
        DirectedLink { tx, rx }
    }
}

impl From<DirectedLink> for [NodeId; 2] {
    fn from(a: DirectedLink) -> Self {
        [a.tx, a.rx]
    }
}

impl fmt::Display for DirectedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.tx, self.rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Line,
    Star,
    Grid,
    Ring,
    Random,
    Explicit,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 6] = [
        TopologyKind::Line,
        TopologyKind::Star,
        TopologyKind::Grid,
        TopologyKind::Ring,
        TopologyKind::Random,
        TopologyKind::Explicit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyKind::Line => "line",
            TopologyKind::Star => "star",
            TopologyKind::Grid => "grid",
            TopologyKind::Ring => "ring",
            TopologyKind::Random => "random",
            TopologyKind::Explicit => "explicit",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("topology", format!("unknown kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    kind: TopologyKind,
    positions: Vec<Position>,
    comm_range: f64,
    links: BTreeSet<Link>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Topology {
    /// Derives links from positions: `{u,v}` exists iff the two nodes are
    /// within `comm_range` (compared on squared distances).
    pub fn from_positions(kind: TopologyKind, positions: Vec<Position>, comm_range: f64) -> Result<Self> {
        validate_geometry(&positions, comm_range)?;
        let range_sq = comm_range * comm_range;
        let mut links = BTreeSet::new();
        for u in 0..positions.len() {
            for v in (u + 1)..positions.len() {
                if positions[u].distance_sq(&positions[v]) <= range_sq {
                    links.insert(Link::new(u, v));
                }
            }
        }
        Ok(Self::assemble(kind, positions, comm_range, links))
    }

    /// Builds a topology with an explicit link set. Links need not respect
    /// the communication range.
    pub fn with_links(
        positions: Vec<Position>,
        comm_range: f64,
        links: impl IntoIterator<Item = Link>,
    ) -> Result<Self> {
        validate_geometry(&positions, comm_range)?;
        let n = positions.len();
        let links: BTreeSet<Link> = links.into_iter().collect();
        if let Some(bad) = links.iter().find(|l| l.hi() >= n) {
            return Err(Error::InvalidTopology(format!(
                "link {bad} references a node outside 0..{n}"
            )));
        }
        Ok(Self::assemble(TopologyKind::Explicit, positions, comm_range, links))
    }

    fn assemble(kind: TopologyKind, positions: Vec<Position>, comm_range: f64, links: BTreeSet<Link>) -> Self {
        let mut adjacency = vec![Vec::new(); positions.len()];
        for l in &links {
            adjacency[l.lo()].push(l.hi());
            adjacency[l.hi()].push(l.lo());
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Topology {
            kind,
            positions,
            comm_range,
            links,
            adjacency,
        }
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position(&self, v: NodeId) -> Position {
        self.positions[v]
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.links.contains(&Link::new(a, b))
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Degree of every node, indexed by `NodeId`.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn directed_view(&self) -> DirectedView {
        DirectedView::from_topology(self)
    }

    pub fn components(&self) -> Vec<Vec<NodeId>> {
        connected_components(self.node_count(), self.links.iter().copied())
    }

    /// Components after removing `removed` from the link set.
    pub fn residual_components(&self, removed: &BTreeSet<Link>) -> Vec<Vec<NodeId>> {
        connected_components(
            self.node_count(),
            self.links.iter().copied().filter(|l| !removed.contains(l)),
        )
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

fn validate_geometry(positions: &[Position], comm_range: f64) -> Result<()> {
    if !(comm_range.is_finite() && comm_range > 0.0) {
        return Err(Error::InvalidTopology(format!(
            "communication range must be positive and finite, got {comm_range}"
        )));
    }
    if let Some((i, p)) = positions.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(Error::InvalidTopology(format!(
            "node {i} has a non-finite position ({}, {})",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Directed connectivity: every undirected link contributes both arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedView {
    node_count: usize,
    arcs: BTreeSet<DirectedLink>,
}

impl DirectedView {
    pub fn from_topology(topology: &Topology) -> Self {
        let arcs = topology
            .links()
            .iter()
            .flat_map(|l| [DirectedLink::new(l.lo(), l.hi()), DirectedLink::new(l.hi(), l.lo())])
            .collect();
        DirectedView {
            node_count: topology.node_count(),
            arcs,
        }
    }

    /// Arbitrary arc set; used for planning on asymmetric graphs and in tests.
    pub fn from_arcs(node_count: usize, arcs: impl IntoIterator<Item = DirectedLink>) -> Result<Self> {
        let arcs: BTreeSet<DirectedLink> = arcs.into_iter().collect();
        if let Some(a) = arcs.iter().find(|a| a.tx == a.rx || a.tx.max(a.rx) >= node_count) {
            return Err(Error::InvalidTopology(format!("invalid arc {a}")));
        }
        Ok(DirectedView { node_count, arcs })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &BTreeSet<DirectedLink> {
        &self.arcs
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for a in &self.arcs {
            deg[a.rx] += 1;
        }
        deg
    }

    /// Whether `t` is reachable from `s` using arcs not in `removed`.
    pub fn reachable_without(&self, s: NodeId, t: NodeId, removed: &BTreeSet<DirectedLink>) -> bool {
        let mut out = vec![Vec::new(); self.node_count];
        for a in self.arcs.iter().filter(|a| !removed.contains(a)) {
            out[a.tx].push(a.rx);
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            if u == t {
                return true;
            }
            for &v in &out[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

/// Connected components of the graph `(0..node_count, links)`. Each component
/// is sorted and components are ordered by their smallest member.
pub fn connected_components(node_count: usize, links: impl IntoIterator<Item = Link>) -> Vec<Vec<NodeId>> {
    let mut parent: Vec<NodeId> = (0..node_count).collect();
    fn find(parent: &mut [NodeId], mut v: NodeId) -> NodeId {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for l in links {
        let (a, b) = (find(&mut parent, l.lo()), find(&mut parent, l.hi()));
        if a != b {
            // keep the smaller id as root so roots are component minima
            let (r, c) = (a.min(b), a.max(b));
            parent[c] = r;
        }
    }
    let mut slot = vec![usize::MAX; node_count];
    let mut components: Vec<Vec<NodeId>> = Vec::new();
    for v in 0..node_count {
        let root = find(&mut parent, v);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(v);
    }
    components
}
