//! Global minimum cuts.
//!
//! The cut weight comes from Stoer–Wagner (undirected) or all-pairs max-flow
//! (directed). Many graphs have several minimum cuts, so the returned cut is
//! then pinned down greedily: links are visited in ascending order and each
//! one is kept if some minimum cut still contains every kept link while
//! avoiding every rejected one. The result is the minimum cut whose sorted
//! link list is lexicographically smallest.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::flow::{FlowNetwork, INF};
use super::{DirectedLink, DirectedView, Link, NodeId, Topology};
use crate::error::{Error, Result};

/// Largest graph [`brute_force_min_cut`] will enumerate.
pub const BRUTE_FORCE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutResult {
    /// Cut links, ascending.
    pub links: Vec<Link>,
    pub weight: usize,
    /// The two sides; the first contains the smallest node id.
    pub partition: (Vec<NodeId>, Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedCutResult {
    /// Cut arcs, ascending by (tx, rx).
    pub arcs: Vec<DirectedLink>,
    pub weight: usize,
    /// Witnessing pair: removing `arcs` leaves no `source → sink` path.
    pub source: NodeId,
    pub sink: NodeId,
}

impl DirectedCutResult {
    /// Receiver endpoints of the cut arcs, ascending and deduplicated.
    pub fn receivers(&self) -> BTreeSet<NodeId> {
        self.arcs.iter().map(|a| a.rx).collect()
    }
}

pub fn global_min_cut_undirected(topology: &Topology) -> Result<CutResult> {
    let n = topology.node_count();
    if n < 2 {
        return Err(Error::NoCut { nodes: n });
    }
    if !topology.is_connected() {
        return Err(Error::Disconnected);
    }
    let links: Vec<Link> = topology.links().iter().copied().collect();
    let weight = stoer_wagner(n, &links) as usize;

    let mut chosen: Vec<Link> = Vec::with_capacity(weight);
    let mut rejected = BTreeSet::new();
    for &link in &links {
        if chosen.len() == weight {
            break;
        }
        chosen.push(link);
        if !undirected_cut_exists(n, &links, &chosen, &rejected, weight as u64) {
            chosen.pop();
            rejected.insert(link);
        }
    }
    debug_assert_eq!(chosen.len(), weight);

    let removed: BTreeSet<Link> = chosen.iter().copied().collect();
    let mut sides = topology.residual_components(&removed).into_iter();
    let first = sides.next().unwrap_or_default();
    let second: Vec<NodeId> = sides.flatten().collect();
    Ok(CutResult {
        links: chosen,
        weight,
        partition: (first, second),
    })
}

/// Minimum cut weight by maximum-adjacency contraction.
fn stoer_wagner(n: usize, links: &[Link]) -> u64 {
    let mut w = vec![vec![0u64; n]; n];
    for l in links {
        w[l.lo()][l.hi()] += 1;
        w[l.hi()][l.lo()] += 1;
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    let mut key = vec![0u64; n];
    let mut added = vec![false; n];
    while active.len() > 1 {
        for &v in &active {
            key[v] = 0;
            added[v] = false;
        }
        let mut prev = usize::MAX;
        for step in 0..active.len() {
            // strict > keeps the smallest index on ties
            let mut pick = usize::MAX;
            for &v in &active {
                if !added[v] && (pick == usize::MAX || key[v] > key[pick]) {
                    pick = v;
                }
            }
            added[pick] = true;
            if step + 1 == active.len() {
                best = best.min(key[pick]);
                for &x in &active {
                    w[prev][x] += w[pick][x];
                    w[x][prev] = w[prev][x];
                }
                w[prev][prev] = 0;
                active.retain(|&v| v != pick);
            } else {
                for &x in &active {
                    key[x] += w[pick][x];
                }
                prev = pick;
            }
        }
    }
    best
}

/// Is there a bipartition crossed by exactly `weight` links that crosses
/// every link in `chosen` and none in `rejected`?
fn undirected_cut_exists(n: usize, links: &[Link], chosen: &[Link], rejected: &BTreeSet<Link>, weight: u64) -> bool {
    // Endpoints of chosen links must land on opposite sides: 2-colour the
    // graph they form, one colouring per connected piece.
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut pieces: Vec<Vec<(NodeId, bool)>> = Vec::new();
    let mut chosen_adj = vec![Vec::new(); n];
    for l in chosen {
        chosen_adj[l.lo()].push(l.hi());
        chosen_adj[l.hi()].push(l.lo());
    }
    for l in chosen {
        let start = l.lo();
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut piece = vec![(start, false)];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            let cu = color[u].unwrap_or(false);
            for &v in &chosen_adj[u] {
                match color[v] {
                    Some(cv) if cv == cu => return false,
                    Some(_) => {}
                    None => {
                        color[v] = Some(!cu);
                        piece.push((v, !cu));
                        stack.push(v);
                    }
                }
            }
        }
        pieces.push(piece);
    }
    if pieces.is_empty() {
        return false;
    }

    let (source, sink) = (n, n + 1);
    for mask in 0u64..(1u64 << (pieces.len() - 1)) {
        let mut net = FlowNetwork::new(n + 2);
        for l in links {
            let cap = if rejected.contains(l) { INF } else { 1 };
            net.add_edge(l.lo(), l.hi(), cap);
        }
        for (i, piece) in pieces.iter().enumerate() {
            let flip = i > 0 && (mask >> (i - 1)) & 1 == 1;
            for &(v, c) in piece {
                if c ^ flip {
                    net.add_arc(v, sink, INF);
                } else {
                    net.add_arc(source, v, INF);
                }
            }
        }
        if net.max_flow(source, sink, weight + 1) == weight {
            return true;
        }
    }
    false
}

fn arc_network(view: &DirectedView, rejected: &BTreeSet<DirectedLink>) -> FlowNetwork {
    let mut net = FlowNetwork::new(view.node_count());
    for a in view.arcs() {
        let cap = if rejected.contains(a) { INF } else { 1 };
        net.add_arc(a.tx, a.rx, cap);
    }
    net
}

/// Minimum over all ordered pairs `(s, t)` of the minimum `s → t` arc cut.
/// Ties go to the smallest `(s, t)`, then to the lexicographically smallest
/// sorted arc list.
pub fn global_min_cut_directed(view: &DirectedView) -> Result<DirectedCutResult> {
    let n = view.node_count();
    if n < 2 {
        return Err(Error::NoCut { nodes: n });
    }
    let no_reject = BTreeSet::new();
    let mut best = view.arcs().len() as u64 + 1;
    let mut pair = (0, 1);
    'pairs: for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let flow = arc_network(view, &no_reject).max_flow(s, t, best);
            if flow < best {
                best = flow;
                pair = (s, t);
                if best == 0 {
                    break 'pairs;
                }
            }
        }
    }
    let (s, t) = pair;
    let weight = best as usize;

    let mut chosen: Vec<DirectedLink> = Vec::with_capacity(weight);
    let mut rejected = BTreeSet::new();
    for &arc in view.arcs() {
        if chosen.len() == weight {
            break;
        }
        chosen.push(arc);
        let mut net = arc_network(view, &rejected);
        for a in &chosen {
            net.add_arc(s, a.tx, INF);
            net.add_arc(a.rx, t, INF);
        }
        if net.max_flow(s, t, best + 1) != best {
            chosen.pop();
            rejected.insert(arc);
        }
    }
    debug_assert_eq!(chosen.len(), weight);
    Ok(DirectedCutResult {
        arcs: chosen,
        weight,
        source: s,
        sink: t,
    })
}

/// Exhaustive minimum cut over every nontrivial bipartition. Exponential;
/// intended as an independent reference for small graphs. Ties use the same
/// lexicographic rule as [`global_min_cut_undirected`].
pub fn brute_force_min_cut(topology: &Topology) -> Result<CutResult> {
    let n = topology.node_count();
    if n < 2 {
        return Err(Error::NoCut { nodes: n });
    }
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            nodes: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    // node 0 is always on the first side; bit i-1 puts node i there too
    let full = (1u32 << (n - 1)) - 1;
    let mut best: Option<(Vec<Link>, u32)> = None;
    for mask in 0..full {
        let first_side = |v: NodeId| v == 0 || (mask >> (v - 1)) & 1 == 1;
        let crossing: Vec<Link> = topology
            .links()
            .iter()
            .copied()
            .filter(|l| first_side(l.lo()) != first_side(l.hi()))
            .collect();
        let better = match &best {
            None => true,
            Some((links, _)) => (crossing.len(), &crossing) < (links.len(), links),
        };
        if better {
            best = Some((crossing, mask));
        }
    }
    let (links, mask) = best.expect("n >= 2 yields at least one bipartition");
    let (first, second): (Vec<NodeId>, Vec<NodeId>) = (0..n).partition(|&v| v == 0 || (mask >> (v - 1)) & 1 == 1);
    Ok(CutResult {
        weight: links.len(),
        links,
        partition: (first, second),
    })
}
