//! Jamming attack planners.
//!
//! Scenario 1 jams undirected links anywhere in the network: both endpoints
//! lose each other's model. Scenario 2 places a limited number of jammers
//! with range `R_J`; a jammed arc `tx → rx` requires `rx` to be within range
//! of some jammer and only blocks that direction.
//!
//! Degrees used for ranking are those of the intact graph and are not
//! updated as links are selected. Remaining ties go to the smaller node ids.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    global_min_cut_directed, global_min_cut_undirected, DirectedLink, Link, NodeId, Position, Topology,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    None,
    /// Unlimited jamming range, bidirectional links.
    S1,
    /// Limited jamming range, directed links.
    S2,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::None => "none",
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Scenario::None),
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            _ => Err(Error::config("scenario", format!("expected s1 or s2, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    None,
    All,
    Mcba,
    Ndba,
    Random,
}

impl Algorithm {
    /// Row label used in comparison tables.
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::None => "No attack",
            Algorithm::All => "Attack all links",
            Algorithm::Mcba => "MCBA",
            Algorithm::Ndba => "NDBA",
            Algorithm::Random => "Random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::None => "none",
            Algorithm::All => "all",
            Algorithm::Mcba => "mcba",
            Algorithm::Ndba => "ndba",
            Algorithm::Random => "random",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Algorithm::None),
            "all" => Ok(Algorithm::All),
            "mcba" => Ok(Algorithm::Mcba),
            "ndba" => Ok(Algorithm::Ndba),
            "random" => Ok(Algorithm::Random),
            _ => Err(Error::config(
                "algo",
                format!("expected one of mcba, ndba, random, all, none; got `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammerPlacement {
    pub position: Position,
    pub range: f64,
}

// Midpoint placements sit at exactly half the pair distance; allow for the
// rounding in that computation.
const COVERAGE_SLACK: f64 = 1e-9;

impl JammerPlacement {
    pub fn covers(&self, p: &Position) -> bool {
        self.position.distance_sq(p) <= self.range * self.range * (1.0 + COVERAGE_SLACK)
    }
}

pub fn is_covered(p: &Position, jammers: &[JammerPlacement]) -> bool {
    jammers.iter().any(|j| j.covers(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub scenario: Scenario,
    pub algorithm: Algorithm,
    /// Scenario 1: jammed undirected links, ascending.
    pub jammed_links: BTreeSet<Link>,
    /// Scenario 2: jammed arcs, ascending by (tx, rx).
    pub jammed_arcs: BTreeSet<DirectedLink>,
    pub jammers: Vec<JammerPlacement>,
    /// Link (S1) or arc (S2) budget; `None` for the unbounded baselines.
    pub budget: Option<usize>,
    pub budget_used: usize,
}

impl AttackPlan {
    fn s1(algorithm: Algorithm, links: impl IntoIterator<Item = Link>, budget: Option<usize>) -> Self {
        let jammed_links: BTreeSet<Link> = links.into_iter().collect();
        AttackPlan {
            scenario: Scenario::S1,
            algorithm,
            budget_used: jammed_links.len(),
            jammed_links,
            jammed_arcs: BTreeSet::new(),
            jammers: Vec::new(),
            budget,
        }
    }

    fn s2(
        algorithm: Algorithm,
        arcs: impl IntoIterator<Item = DirectedLink>,
        jammers: &[JammerPlacement],
        budget: usize,
    ) -> Self {
        let jammed_arcs: BTreeSet<DirectedLink> = arcs.into_iter().collect();
        AttackPlan {
            scenario: Scenario::S2,
            algorithm,
            budget_used: jammed_arcs.len(),
            jammed_links: BTreeSet::new(),
            jammed_arcs,
            jammers: jammers.to_vec(),
            budget: Some(budget),
        }
    }

    /// Does this plan stop `rx` from receiving `tx`'s model?
    pub fn blocks(&self, tx: NodeId, rx: NodeId) -> bool {
        (tx != rx && self.jammed_links.contains(&Link::new(tx, rx)))
            || self.jammed_arcs.contains(&DirectedLink::new(tx, rx))
    }

    /// Checks budget, link realness and (Scenario 2) receiver coverage.
    pub fn validate(&self, topology: &Topology, max_jammers: Option<usize>) -> Result<()> {
        let over_budget = |used: usize| self.budget.is_some_and(|b| used > b);
        if let Some(l) = self.jammed_links.iter().find(|l| !topology.links().contains(l)) {
            return Err(Error::config("plan", format!("jammed link {l} is not in the topology")));
        }
        if let Some(a) = self.jammed_arcs.iter().find(|a| !topology.has_link(a.tx, a.rx)) {
            return Err(Error::config("plan", format!("jammed arc {a} is not in the topology")));
        }
        if over_budget(self.jammed_links.len() + self.jammed_arcs.len()) {
            return Err(Error::config("plan", "jammed set exceeds the budget"));
        }
        if self.budget_used != self.jammed_links.len() + self.jammed_arcs.len() {
            return Err(Error::config("plan", "budget_used disagrees with the jammed set"));
        }
        if self.scenario == Scenario::S2 {
            if let Some(a) = self
                .jammed_arcs
                .iter()
                .find(|a| !is_covered(&topology.position(a.rx), &self.jammers))
            {
                return Err(Error::config(
                    "plan",
                    format!("receiver of {a} is not covered by any jammer"),
                ));
            }
            if max_jammers.is_some_and(|m| self.jammers.len() > m) {
                return Err(Error::config("plan", "too many jammers"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sort key for Scenario 1: endpoint degrees `(d1 ≤ d2)`, then the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinkRank {
    pub d1: usize,
    pub d2: usize,
    pub link: Link,
}

impl LinkRank {
    pub fn new(link: Link, degrees: &[usize]) -> Self {
        let (a, b) = (degrees[link.lo()], degrees[link.hi()]);
        LinkRank {
            d1: a.min(b),
            d2: a.max(b),
            link,
        }
    }
}

/// Sort key for Scenario 2: receiver in-degree, then `(tx, rx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArcRank {
    pub d2: usize,
    pub arc: DirectedLink,
}

fn ranked_links(links: impl IntoIterator<Item = Link>, degrees: &[usize]) -> Vec<Link> {
    let mut ranks: Vec<LinkRank> = links.into_iter().map(|l| LinkRank::new(l, degrees)).collect();
    ranks.sort_unstable();
    ranks.into_iter().map(|r| r.link).collect()
}

fn ranked_arcs(arcs: impl IntoIterator<Item = DirectedLink>, in_degrees: &[usize]) -> Vec<DirectedLink> {
    let mut ranks: Vec<ArcRank> = arcs
        .into_iter()
        .map(|arc| ArcRank {
            d2: in_degrees[arc.rx],
            arc,
        })
        .collect();
    ranks.sort_unstable();
    ranks.into_iter().map(|r| r.arc).collect()
}

pub fn no_attack() -> AttackPlan {
    AttackPlan {
        scenario: Scenario::None,
        algorithm: Algorithm::None,
        jammed_links: BTreeSet::new(),
        jammed_arcs: BTreeSet::new(),
        jammers: Vec::new(),
        budget: Some(0),
        budget_used: 0,
    }
}

/// Every link jammed in both directions: each node trains alone.
pub fn attack_all(topology: &Topology) -> AttackPlan {
    AttackPlan::s1(Algorithm::All, topology.links().iter().copied(), None)
}

/// Node-degree-based link selection, Scenario 1.
pub fn ndba_s1(topology: &Topology, budget: usize) -> AttackPlan {
    let ranked = ranked_links(topology.links().iter().copied(), &topology.degrees());
    AttackPlan::s1(Algorithm::Ndba, ranked.into_iter().take(budget), Some(budget))
}

/// Minimum-cut-based link selection, Scenario 1: the cut first (lowest
/// ranked members if the budget cannot cover it), then the lowest-ranked
/// remaining links.
pub fn mcba_s1(topology: &Topology, budget: usize) -> Result<AttackPlan> {
    if budget == 0 {
        return Ok(AttackPlan::s1(Algorithm::Mcba, [], Some(0)));
    }
    let degrees = topology.degrees();
    let cut = global_min_cut_undirected(topology)?;
    let in_cut: BTreeSet<Link> = cut.links.iter().copied().collect();
    let mut selected = ranked_links(in_cut.iter().copied(), &degrees);
    selected.truncate(budget);
    if budget > in_cut.len() {
        let rest = topology.links().iter().copied().filter(|l| !in_cut.contains(l));
        selected.extend(ranked_links(rest, &degrees).into_iter().take(budget - in_cut.len()));
    }
    Ok(AttackPlan::s1(Algorithm::Mcba, selected, Some(budget)))
}

/// Uniform sample of `min(budget, |links|)` links without replacement.
pub fn random_s1<R: Rng + ?Sized>(topology: &Topology, budget: usize, rng: &mut R) -> AttackPlan {
    let links: Vec<Link> = topology.links().iter().copied().collect();
    let k = budget.min(links.len());
    let picked = index::sample(rng, links.len(), k).into_iter().map(|i| links[i]);
    AttackPlan::s1(Algorithm::Random, picked, Some(budget))
}

/// Smallest `(in-degree, id)` among `candidates`.
fn min_in_degree(candidates: impl Iterator<Item = NodeId>, in_degrees: &[usize]) -> Option<NodeId> {
    candidates.min_by_key(|&v| (in_degrees[v], v))
}

struct Deployment<'a> {
    topology: &'a Topology,
    in_degrees: Vec<usize>,
    range: f64,
    max_jammers: usize,
    jammers: Vec<JammerPlacement>,
    covered: Vec<bool>,
}

impl<'a> Deployment<'a> {
    fn new(topology: &'a Topology, max_jammers: usize, range: f64) -> Self {
        Deployment {
            topology,
            in_degrees: topology.directed_view().in_degrees(),
            range,
            max_jammers,
            jammers: Vec::new(),
            covered: vec![false; topology.node_count()],
        }
    }

    fn budget_left(&self) -> bool {
        self.jammers.len() < self.max_jammers
    }

    fn uncovered(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.topology.node_count()).filter(|&v| !self.covered[v])
    }

    fn within_pair_range(&self, a: NodeId, b: NodeId) -> bool {
        let reach = 2.0 * self.range;
        self.topology.position(a).distance_sq(&self.topology.position(b)) <= reach * reach
    }

    /// Best partner for `n1` among uncovered nodes satisfying `eligible`.
    fn partner(&self, n1: NodeId, eligible: impl Fn(NodeId) -> bool) -> Option<NodeId> {
        min_in_degree(
            self.uncovered()
                .filter(|&v| v != n1 && eligible(v) && self.within_pair_range(n1, v)),
            &self.in_degrees,
        )
    }

    fn place(&mut self, n1: NodeId, n2: Option<NodeId>) {
        let p1 = self.topology.position(n1);
        let position = match n2 {
            Some(n2) => p1.midpoint(&self.topology.position(n2)),
            None => p1,
        };
        let jammer = JammerPlacement {
            position,
            range: self.range,
        };
        for (v, pos) in self.topology.positions().iter().enumerate() {
            if jammer.covers(pos) {
                self.covered[v] = true;
            }
        }
        self.jammers.push(jammer);
    }

    /// Cover the lowest in-degree uncovered nodes, pairing each with its
    /// best uncovered partner within `2·R_J`.
    fn cover_by_degree(&mut self) {
        while self.budget_left() {
            let Some(n1) = min_in_degree(self.uncovered(), &self.in_degrees) else {
                break;
            };
            let n2 = self.partner(n1, |_| true);
            self.place(n1, n2);
        }
    }
}

/// Minimum-cut-based jammer deployment. Nodes of the cut are the receivers
/// of the directed minimum-cut arcs; they are covered first (pairing with
/// another cut node, else with a non-cut node), then any budget left covers
/// the remaining nodes by in-degree.
pub fn deploy_mincut(topology: &Topology, max_jammers: usize, range: f64) -> Result<Vec<JammerPlacement>> {
    check_range(range)?;
    if max_jammers == 0 {
        return Ok(Vec::new());
    }
    let cut = global_min_cut_directed(&topology.directed_view())?;
    let members = cut.receivers();
    let mut d = Deployment::new(topology, max_jammers, range);
    while d.budget_left() {
        let Some(n1) = min_in_degree(d.uncovered().filter(|v| members.contains(v)), &d.in_degrees) else {
            break;
        };
        let n2 = d
            .partner(n1, |v| members.contains(&v))
            .or_else(|| d.partner(n1, |v| !members.contains(&v)));
        d.place(n1, n2);
    }
    d.cover_by_degree();
    Ok(d.jammers)
}

/// Node-degree-based jammer deployment.
pub fn deploy_degree(topology: &Topology, max_jammers: usize, range: f64) -> Result<Vec<JammerPlacement>> {
    check_range(range)?;
    let mut d = Deployment::new(topology, max_jammers, range);
    d.cover_by_degree();
    Ok(d.jammers)
}

fn check_range(range: f64) -> Result<()> {
    if range > 0.0 && range.is_finite() {
        Ok(())
    } else {
        Err(Error::config("rj", "jamming range must be positive"))
    }
}

fn covered_arcs<'t>(topology: &'t Topology, jammers: &'t [JammerPlacement]) -> impl Iterator<Item = DirectedLink> + 't {
    topology
        .links()
        .iter()
        .flat_map(|l| [DirectedLink::new(l.lo(), l.hi()), DirectedLink::new(l.hi(), l.lo())])
        .filter(move |a| is_covered(&topology.position(a.rx), jammers))
}

/// Node-degree-based arc selection, Scenario 2.
pub fn ndba_s2(topology: &Topology, jammers: &[JammerPlacement], budget: usize) -> AttackPlan {
    let in_degrees = topology.directed_view().in_degrees();
    let ranked = ranked_arcs(covered_arcs(topology, jammers), &in_degrees);
    AttackPlan::s2(Algorithm::Ndba, ranked.into_iter().take(budget), jammers, budget)
}

/// Minimum-cut-based arc selection, Scenario 2: covered arcs of the directed
/// minimum cut first, then other covered arcs, each by receiver in-degree.
pub fn mcba_s2(topology: &Topology, jammers: &[JammerPlacement], budget: usize) -> Result<AttackPlan> {
    if budget == 0 {
        return Ok(AttackPlan::s2(Algorithm::Mcba, [], jammers, 0));
    }
    let view = topology.directed_view();
    let in_degrees = view.in_degrees();
    let cut: BTreeSet<DirectedLink> = global_min_cut_directed(&view)?.arcs.into_iter().collect();
    let (inside, outside): (Vec<DirectedLink>, Vec<DirectedLink>) =
        covered_arcs(topology, jammers).partition(|a| cut.contains(a));
    let mut selected = ranked_arcs(inside, &in_degrees);
    selected.truncate(budget);
    let taken = selected.len();
    selected.extend(ranked_arcs(outside, &in_degrees).into_iter().take(budget - taken));
    Ok(AttackPlan::s2(Algorithm::Mcba, selected, jammers, budget))
}

/// Random Scenario 2 baseline: jammers uniform in `[area_min, area_max]²`,
/// then a uniform sample of up to `budget` arcs with covered receivers.
/// May jam nothing if no jammer lands near a node.
pub fn random_s2<R: Rng + ?Sized>(
    topology: &Topology,
    max_jammers: usize,
    range: f64,
    area: (f64, f64),
    budget: usize,
    rng: &mut R,
) -> Result<AttackPlan> {
    check_range(range)?;
    let (lo, hi) = area;
    if !(lo <= hi) {
        return Err(Error::config("area", "area_min must not exceed area_max"));
    }
    let jammers: Vec<JammerPlacement> = (0..max_jammers)
        .map(|_| JammerPlacement {
            position: Position::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi)),
            range,
        })
        .collect();
    Ok(random_arcs(topology, &jammers, budget, rng))
}

/// Uniform sample of up to `budget` covered-receiver arcs for fixed jammers.
pub fn random_arcs<R: Rng + ?Sized>(
    topology: &Topology,
    jammers: &[JammerPlacement],
    budget: usize,
    rng: &mut R,
) -> AttackPlan {
    let candidates: Vec<DirectedLink> = covered_arcs(topology, jammers).collect();
    let k = budget.min(candidates.len());
    let picked = index::sample(rng, candidates.len(), k)
        .into_iter()
        .map(|i| candidates[i]);
    AttackPlan::s2(Algorithm::Random, picked, jammers, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_topology, LayoutParams, TopologyKind};
    use crate::seed::{node_stream, Purpose, SimRng};
    use rand::SeedableRng;

    fn fixed(kind: TopologyKind) -> Topology {
        build_topology(
            kind,
            &LayoutParams::default(),
            &mut node_stream(0, Purpose::Topology, 0),
        )
        .unwrap()
    }

    fn links(pairs: &[(usize, usize)]) -> BTreeSet<Link> {
        pairs.iter().map(|&(a, b)| Link::new(a, b)).collect()
    }

    fn arcs(pairs: &[(usize, usize)]) -> BTreeSet<DirectedLink> {
        pairs.iter().map(|&(a, b)| DirectedLink::new(a, b)).collect()
    }

    #[test]
    fn ndba_s1_examples() {
        let line = fixed(TopologyKind::Line);
        assert_eq!(ndba_s1(&line, 2).jammed_links, links(&[(0, 1), (3, 4)]));
        let star = fixed(TopologyKind::Star);
        let plan = ndba_s1(&star, 2);
        for l in &plan.jammed_links {
            let mut d = [star.degree(l.lo()), star.degree(l.hi())];
            d.sort();
            assert_eq!(d, [1, 2]);
        }
        assert_eq!(plan.jammed_links, links(&[(0, 1), (3, 4)]));
        assert_eq!(ndba_s1(&line, 10).jammed_links, *line.links());
        assert!(ndba_s1(&line, 0).jammed_links.is_empty());
    }

    #[test]
    fn mcba_s1_examples() {
        let line = fixed(TopologyKind::Line);
        let one = mcba_s1(&line, 1).unwrap();
        assert_eq!(one.jammed_links, links(&[(0, 1)]));
        assert_eq!(line.residual_components(&one.jammed_links).len(), 2);
        assert!(mcba_s1(&line, 0).unwrap().jammed_links.is_empty());

        let ring = fixed(TopologyKind::Ring);
        let plan = mcba_s1(&ring, 4).unwrap();
        // cut {0,1},{0,5}, then the two smallest remaining (2,2) links
        assert_eq!(plan.jammed_links, links(&[(0, 1), (0, 5), (1, 2), (2, 3)]));
        assert!(ring.residual_components(&plan.jammed_links).len() >= 2);
    }

    #[test]
    fn mcba_s1_partial_cut_uses_degree_rank() {
        // two triangles joined by two parallel paths: cut weight 2,
        // budget 1 keeps the lower-degree cut link
        let pos = (0..6).map(|i| Position::new(i as f64, 0.0)).collect();
        let t = Topology::with_links(
            pos,
            1.0,
            links(&[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3), (1, 4), (0, 5)]),
        )
        .unwrap();
        let cut = global_min_cut_undirected(&t).unwrap();
        let plan = mcba_s1(&t, 1).unwrap();
        assert_eq!(plan.budget_used, 1);
        assert!(cut.links.contains(plan.jammed_links.iter().next().unwrap()));
    }

    #[test]
    fn deploy_midpoint_covers_pair() {
        let pos = vec![Position::new(0.0, 0.0), Position::new(400.0, 0.0)];
        let t = Topology::with_links(pos, 400.0, links(&[(0, 1)])).unwrap();
        let j = deploy_degree(&t, 1, 200.0).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].position, Position::new(200.0, 0.0));
        assert!(j[0].covers(&t.position(0)) && j[0].covers(&t.position(1)));
        assert_eq!(deploy_mincut(&t, 1, 200.0).unwrap(), j);
    }

    #[test]
    fn deploy_zero_jammers() {
        let line = fixed(TopologyKind::Line);
        assert!(deploy_mincut(&line, 0, 200.0).unwrap().is_empty());
        assert!(deploy_degree(&line, 0, 200.0).unwrap().is_empty());
    }

    #[test]
    fn deploy_mincut_line() {
        let line = fixed(TopologyKind::Line);
        let j = deploy_mincut(&line, 2, 200.0).unwrap();
        // cut receiver 1 pairs with its lowest in-degree neighbour 0; then
        // leaf 4 pairs with node 2 (ties on in-degree go to the smaller id)
        assert_eq!(
            j.iter().map(|j| j.position).collect::<Vec<_>>(),
            vec![Position::new(300.0, 600.0), Position::new(800.0, 600.0)]
        );
        assert!(line.positions().iter().all(|p| is_covered(p, &j)));
    }

    #[test]
    fn deploy_stops_when_all_covered() {
        let line = fixed(TopologyKind::Line);
        let j = deploy_degree(&line, 5, 200.0).unwrap();
        assert_eq!(j.len(), 2);
        let j = deploy_mincut(&line, 5, 200.0).unwrap();
        assert_eq!(j.len(), 2);
    }

    #[test]
    fn deploy_degree_ring() {
        let ring = fixed(TopologyKind::Ring);
        let j = deploy_degree(&ring, 2, 200.0).unwrap();
        // all in-degrees tie: node 0 (200,200) pairs with node 1 (200,400);
        // node 2 (200,600) is 300 m from that jammer and pairs with node 3
        assert_eq!(j[0].position, Position::new(200.0, 300.0));
        assert_eq!(j[1].position, Position::new(200.0, 700.0));
        assert_eq!(deploy_degree(&ring, 2, 200.0).unwrap(), j);
    }

    #[test]
    fn isolated_node_gets_jammer_on_top() {
        let pos = vec![Position::new(0.0, 0.0), Position::new(1000.0, 0.0)];
        let t = Topology::with_links(pos, 1000.0, links(&[(0, 1)])).unwrap();
        let j = deploy_degree(&t, 1, 200.0).unwrap();
        assert_eq!(j[0].position, Position::new(0.0, 0.0));
    }

    #[test]
    fn ndba_s2_examples() {
        let line = fixed(TopologyKind::Line);
        assert!(ndba_s2(&line, &[], 10).jammed_arcs.is_empty());

        // node 1 of a 4-node star has in-degree 3
        let pos = vec![
            Position::new(0.0, 0.0),
            Position::new(1000.0, 1000.0),
            Position::new(0.0, 2000.0),
            Position::new(2000.0, 1000.0),
        ];
        let t = Topology::with_links(pos, 5000.0, links(&[(0, 1), (1, 2), (1, 3)])).unwrap();
        let jam = [JammerPlacement {
            position: Position::new(1000.0, 1000.0),
            range: 10.0,
        }];
        assert_eq!(ndba_s2(&t, &jam, 2).jammed_arcs, arcs(&[(0, 1), (2, 1)]));
        assert_eq!(ndba_s2(&t, &jam, 9).jammed_arcs, arcs(&[(0, 1), (2, 1), (3, 1)]));
    }

    #[test]
    fn mcba_s2_line_single_cut_arc() {
        let line = fixed(TopologyKind::Line);
        let jam = [JammerPlacement {
            position: line.position(1),
            range: 10.0,
        }];
        assert_eq!(mcba_s2(&line, &jam, 1).unwrap().jammed_arcs, arcs(&[(0, 1)]));
        assert!(mcba_s2(&line, &jam, 0).unwrap().jammed_arcs.is_empty());
    }

    #[test]
    fn mcba_s2_without_cut_coverage_matches_ndba() {
        let line = fixed(TopologyKind::Line);
        let jam = [JammerPlacement {
            position: line.position(3),
            range: 10.0,
        }];
        for budget in 0..4 {
            assert_eq!(
                mcba_s2(&line, &jam, budget).unwrap().jammed_arcs,
                ndba_s2(&line, &jam, budget).jammed_arcs
            );
        }
    }

    #[test]
    fn line_s2_plans() {
        let line = fixed(TopologyKind::Line);
        let jm = deploy_mincut(&line, 2, 200.0).unwrap();
        let jd = deploy_degree(&line, 2, 200.0).unwrap();
        let m = mcba_s2(&line, &jm, 4).unwrap();
        let d = ndba_s2(&line, &jd, 4);
        assert_eq!(m.jammed_arcs, arcs(&[(0, 1), (1, 0), (1, 2), (3, 4)]));
        assert_eq!(d.jammed_arcs, m.jammed_arcs);
        m.validate(&line, Some(2)).unwrap();
        d.validate(&line, Some(2)).unwrap();
    }

    #[test]
    fn baselines() {
        let line = fixed(TopologyKind::Line);
        let none = no_attack();
        assert_eq!(none.budget_used, 0);
        assert_eq!(attack_all(&line).jammed_links.len(), 4);
        let mut rng = SimRng::seed_from_u64(1);
        let r = random_s1(&line, 3, &mut rng);
        assert_eq!(r.budget_used, 3);
        r.validate(&line, None).unwrap();
        assert_eq!(random_s1(&line, 30, &mut rng).budget_used, 4);
    }

    #[test]
    fn random_s2_far_jammers_jam_nothing() {
        let line = fixed(TopologyKind::Line);
        let mut rng = SimRng::seed_from_u64(3);
        // jammers confined to a corner 300 m away from every node
        let plan = random_s2(&line, 2, 100.0, (0.0, 100.0), 8, &mut rng).unwrap();
        assert_eq!(plan.jammers.len(), 2);
        assert!(plan.jammed_arcs.is_empty());
        plan.validate(&line, Some(2)).unwrap();
    }

    #[test]
    fn validate_catches_fake_links() {
        let line = fixed(TopologyKind::Line);
        let mut plan = ndba_s1(&line, 1);
        plan.jammed_links.insert(Link::new(0, 4));
        plan.budget_used = 2;
        assert!(plan.validate(&line, None).is_err());
    }

    #[test]
    fn blocks_direction() {
        let line = fixed(TopologyKind::Line);
        let jam = [JammerPlacement {
            position: line.position(1),
            range: 10.0,
        }];
        let plan = mcba_s2(&line, &jam, 1).unwrap();
        assert!(plan.blocks(0, 1));
        assert!(!plan.blocks(1, 0));
        let s1 = ndba_s1(&line, 1);
        assert!(s1.blocks(0, 1) && s1.blocks(1, 0));
    }

    #[test]
    fn plan_json_round_trip() {
        let line = fixed(TopologyKind::Line);
        let jm = deploy_mincut(&line, 2, 200.0).unwrap();
        let plan = mcba_s2(&line, &jm, 4).unwrap();
        let back: AttackPlan = serde_json::from_str(&plan.to_json().unwrap()).unwrap();
        assert_eq!(back, plan);
    }
}
