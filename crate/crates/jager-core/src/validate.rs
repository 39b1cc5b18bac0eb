//! Traceback validation: assemble decrypted hops into a directed multigraph,
//! classify carriers by degree, flag faulty attestations, and recover the
//! call path.
//!
//! Each hop `(prev, cur, next)` contributes the edges `prev -> cur` and
//! `cur -> next`, with sentinel endpoints omitted. On a complete honest path
//! the originator has in-degree 0 and out-degree 2, the terminator the
//! mirror image, and every transit carrier 2/2. Classification:
//!
//! * in-degree 0 — claims to originate (`origin_candidates`);
//! * in-degree > 0, out-degree 0 — claims to terminate;
//! * everything else — transit.
//!
//! A unique origin candidate is accepted as the origin even when isolated
//! (a sentinel-only hop has no edges). With several candidates, out-degree 2
//! separates plausible origins from faulty or under-attested ones; a carrier
//! classified as transit whose degrees fall outside `{1, 2}` is flagged
//! faulty. When the graph is weakly connected the report carries the
//! shortest origin-to-terminator path (fewest edges, then lexicographically
//! smallest); otherwise it lists the connected components for manual
//! investigation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::hop::Hop;
use crate::CarrierId;

/// Directed multigraph over carriers; edge multiplicities are preserved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceGraph {
    pub vertices: BTreeSet<CarrierId>,
    pub edges: Vec<(CarrierId, CarrierId)>,
}

impl TraceGraph {
    pub fn degree_in(&self, v: CarrierId) -> usize {
        self.edges.iter().filter(|(_, to)| *to == v).count()
    }

    pub fn degree_out(&self, v: CarrierId) -> usize {
        self.edges.iter().filter(|(from, _)| *from == v).count()
    }
}

/// Build the multigraph from a set of hops. Sentinels never become vertices
/// or edge endpoints; duplicate hops contribute duplicate edges.
pub fn build_multigraph(hops: &[Hop]) -> TraceGraph {
    let mut g = TraceGraph::default();
    for hop in hops {
        for id in [hop.prev, hop.cur, hop.next] {
            if !id.is_sentinel() {
                g.vertices.insert(id);
            }
        }
        if !hop.prev.is_sentinel() {
            g.edges.push((hop.prev, hop.cur));
        }
        if !hop.next.is_sentinel() {
            g.edges.push((hop.cur, hop.next));
        }
    }
    g
}

/// Carriers flagged for manual investigation, by invariant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultySets {
    pub origin: BTreeSet<CarrierId>,
    pub terminating: BTreeSet<CarrierId>,
    pub transit: BTreeSet<CarrierId>,
}

impl FaultySets {
    pub fn is_empty(&self) -> bool {
        self.origin.is_empty() && self.terminating.is_empty() && self.transit.is_empty()
    }

    pub fn contains(&self, v: CarrierId) -> bool {
        self.origin.contains(&v) || self.terminating.contains(&v) || self.transit.contains(&v)
    }
}

/// A recovered path, labeled with the origin candidate it starts from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredPath {
    pub origin: CarrierId,
    pub path: Vec<CarrierId>,
}

/// One weakly-connected component, with its induced edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub vertices: Vec<CarrierId>,
    pub edges: Vec<(CarrierId, CarrierId)>,
}

/// Output of [`validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// The resolved originator, when exactly one plausible candidate exists.
    pub origin: Option<CarrierId>,
    /// Every carrier that claims to originate (in-degree 0).
    pub origin_candidates: BTreeSet<CarrierId>,
    /// The resolved terminating carrier.
    pub terminator: Option<CarrierId>,
    /// Every carrier that claims to terminate.
    pub terminator_candidates: BTreeSet<CarrierId>,
    /// Carriers that claim to transit the call.
    pub transit: BTreeSet<CarrierId>,
    /// Carriers violating the origin/terminating/transit invariants.
    pub faulty: FaultySets,
    /// Whether the multigraph is weakly connected (trivially true for a
    /// single vertex, false for an empty graph).
    pub connected: bool,
    /// Recovered call path(s): one per surviving origin candidate that
    /// reaches the terminator.
    pub paths: Vec<RecoveredPath>,
    /// Connected components, reported when the graph is disconnected.
    pub subgraphs: Vec<Subgraph>,
}

impl ValidationReport {
    /// The single recovered path, when origin resolution succeeded.
    pub fn call_path(&self) -> Option<&[CarrierId]> {
        match (self.origin, self.paths.first()) {
            (Some(o), Some(p)) if p.origin == o => Some(&p.path),
            _ => None,
        }
    }
}

/// Run the validation algorithm over a multiset of hops.
///
/// Total: every input (including the empty one) produces a report.
/// Deterministic: the result depends only on the hop multiset, not its order.
/// Identical duplicate hops are collapsed first — a doubly-submitted record
/// must not manufacture degree faults — while distinct hops asserting the
/// same edge keep their multiplicity (that is the honest 2/2 transit
/// profile).
pub fn validate(hops: &[Hop]) -> ValidationReport {
    let mut deduped: Vec<Hop> = hops.to_vec();
    deduped.sort_unstable_by_key(|h| (h.prev, h.cur, h.next));
    deduped.dedup();
    let graph = build_multigraph(&deduped);
    let mut report = ValidationReport::default();
    if graph.vertices.is_empty() {
        return report;
    }

    let mut deg: BTreeMap<CarrierId, (usize, usize)> = BTreeMap::new();
    for v in &graph.vertices {
        deg.insert(*v, (0, 0));
    }
    for (from, to) in &graph.edges {
        deg.get_mut(from).expect("edge endpoints are vertices").1 += 1;
        deg.get_mut(to).expect("edge endpoints are vertices").0 += 1;
    }

    for (&v, &(din, dout)) in &deg {
        if din == 0 {
            report.origin_candidates.insert(v);
        } else if dout == 0 {
            report.terminator_candidates.insert(v);
        } else {
            report.transit.insert(v);
        }
    }

    // Origin resolution: a unique claimant is accepted outright; among
    // multiple claimants, out-degree 2 marks the plausible ones.
    let mut plausible_origins: Vec<CarrierId> = Vec::new();
    if report.origin_candidates.len() == 1 {
        let v = *report.origin_candidates.iter().next().expect("len 1");
        report.origin = Some(v);
        plausible_origins.push(v);
    } else if report.origin_candidates.len() > 1 {
        for &v in &report.origin_candidates {
            if deg[&v].1 == 2 {
                plausible_origins.push(v);
            } else {
                report.faulty.origin.insert(v);
            }
        }
        if plausible_origins.len() == 1 {
            report.origin = Some(plausible_origins[0]);
        }
    }

    // Terminator resolution, symmetric with in-degree 2.
    if report.terminator_candidates.len() == 1 {
        report.terminator = report.terminator_candidates.iter().next().copied();
    } else if report.terminator_candidates.len() > 1 {
        let mut plausible = Vec::new();
        for &v in &report.terminator_candidates {
            if deg[&v].0 == 2 {
                plausible.push(v);
            } else {
                report.faulty.terminating.insert(v);
            }
        }
        if plausible.len() == 1 {
            report.terminator = Some(plausible[0]);
        }
    }

    // Transit invariant: both degrees must be in {1, 2}.
    for &v in &report.transit {
        let (din, dout) = deg[&v];
        if !(1..=2).contains(&din) || !(1..=2).contains(&dout) {
            report.faulty.transit.insert(v);
        }
    }

    report.connected = is_weakly_connected(&graph);
    if report.connected {
        if let Some(term) = report.terminator {
            for &o in &plausible_origins {
                if let Some(path) = shortest_path(&graph, o, term) {
                    report.paths.push(RecoveredPath { origin: o, path });
                }
            }
        }
    } else {
        report.subgraphs = components(&graph);
    }
    report
}

fn is_weakly_connected(graph: &TraceGraph) -> bool {
    let mut seen = BTreeSet::new();
    let start = match graph.vertices.iter().next() {
        Some(v) => *v,
        None => return false,
    };
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(v) = stack.pop() {
        for &(a, b) in &graph.edges {
            let other = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if seen.insert(other) {
                stack.push(other);
            }
        }
    }
    seen.len() == graph.vertices.len()
}

fn components(graph: &TraceGraph) -> Vec<Subgraph> {
    let mut unassigned: BTreeSet<CarrierId> = graph.vertices.clone();
    let mut out = Vec::new();
    while let Some(&start) = unassigned.iter().next() {
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        comp.insert(start);
        while let Some(v) = stack.pop() {
            for &(a, b) in &graph.edges {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if comp.insert(other) {
                    stack.push(other);
                }
            }
        }
        for v in &comp {
            unassigned.remove(v);
        }
        let edges = graph
            .edges
            .iter()
            .filter(|(a, _)| comp.contains(a))
            .copied()
            .collect();
        out.push(Subgraph { vertices: comp.into_iter().collect(), edges });
    }
    out
}

/// Fewest-edge directed path, ties broken toward the lexicographically
/// smallest vertex sequence.
fn shortest_path(graph: &TraceGraph, from: CarrierId, to: CarrierId) -> Option<Vec<CarrierId>> {
    if from == to {
        return Some(vec![from]);
    }
    // Deduplicated sorted adjacency keeps the walk deterministic.
    let mut adj: BTreeMap<CarrierId, BTreeSet<CarrierId>> = BTreeMap::new();
    let mut radj: BTreeMap<CarrierId, BTreeSet<CarrierId>> = BTreeMap::new();
    for &(a, b) in &graph.edges {
        adj.entry(a).or_default().insert(b);
        radj.entry(b).or_default().insert(a);
    }
    let dist_from = bfs_distances(&adj, from);
    let dist_to = bfs_distances(&radj, to);
    let total = *dist_from.get(&to)?;

    let mut path = vec![from];
    let mut cur = from;
    for step in 0..total {
        let next = adj
            .get(&cur)?
            .iter()
            .find(|v| {
                dist_from.get(v) == Some(&(step + 1))
                    && dist_to.get(v).map(|d| d + step + 1 == total).unwrap_or(false)
            })
            .copied()?;
        path.push(next);
        cur = next;
    }
    Some(path)
}

fn bfs_distances(
    adj: &BTreeMap<CarrierId, BTreeSet<CarrierId>>,
    start: CarrierId,
) -> BTreeMap<CarrierId, usize> {
    let mut dist = BTreeMap::new();
    dist.insert(start, 0);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if let Some(neighbors) = adj.get(&v) {
            for &n in neighbors {
                if !dist.contains_key(&n) {
                    dist.insert(n, d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hop(prev: u64, cur: u64, next: u64) -> Hop {
        Hop::new(CarrierId(prev), CarrierId(cur), CarrierId(next)).unwrap()
    }

    fn origin_hop(cur: u64, next: u64) -> Hop {
        Hop::new(CarrierId::ORIGIN, CarrierId(cur), CarrierId(next)).unwrap()
    }

    fn term_hop(prev: u64, cur: u64) -> Hop {
        Hop::new(CarrierId(prev), CarrierId(cur), CarrierId::TERM).unwrap()
    }

    /// Complete honest hop set for the path 1 -> 2 -> ... -> n.
    fn ideal_path(n: u64) -> Vec<Hop> {
        (1..=n)
            .map(|i| match (i == 1, i == n) {
                (true, false) => origin_hop(1, 2),
                (false, true) => term_hop(n - 1, n),
                _ => hop(i - 1, i, i + 1),
            })
            .collect()
    }

    #[test]
    fn multigraph_shapes() {
        let g = build_multigraph(&[hop(1, 2, 3)]);
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges, vec![(CarrierId(1), CarrierId(2)), (CarrierId(2), CarrierId(3))]);

        // Duplicate hops keep multiplicity.
        let g = build_multigraph(&[hop(1, 2, 3), hop(1, 2, 3)]);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.degree_in(CarrierId(2)), 2);

        // Ideal 4-carrier degree profile.
        let g = build_multigraph(&ideal_path(4));
        assert_eq!((g.degree_in(CarrierId(1)), g.degree_out(CarrierId(1))), (0, 2));
        assert_eq!((g.degree_in(CarrierId(4)), g.degree_out(CarrierId(4))), (2, 0));
        for transit in [2u64, 3] {
            let v = CarrierId(transit);
            assert_eq!((g.degree_in(v), g.degree_out(v)), (2, 2));
        }
    }

    #[test]
    fn ideal_paths_validate_cleanly() {
        for n in 2..=8u64 {
            let report = validate(&ideal_path(n));
            assert!(report.faulty.is_empty(), "n={n}");
            assert_eq!(report.origin, Some(CarrierId(1)));
            assert_eq!(report.terminator, Some(CarrierId(n)));
            assert!(report.connected);
            let expect: Vec<CarrierId> = (1..=n).map(CarrierId).collect();
            assert_eq!(report.call_path().unwrap(), &expect[..]);
        }
    }

    #[test]
    fn originator_only_contribution_identifies_origin() {
        let report = validate(&[origin_hop(1, 2)]);
        assert_eq!(report.origin, Some(CarrierId(1)));
        assert_eq!(report.terminator, Some(CarrierId(2)));
        assert!(report.faulty.is_empty());
        assert_eq!(report.call_path().unwrap(), &[CarrierId(1), CarrierId(2)]);
    }

    #[test]
    fn isolated_unique_origin_claim_is_admitted() {
        let solo = Hop::new(CarrierId::ORIGIN, CarrierId(1), CarrierId::TERM).unwrap();
        let report = validate(&[solo]);
        assert_eq!(report.origin, Some(CarrierId(1)));
        assert!(report.faulty.is_empty());
        assert!(report.connected);
    }

    #[test]
    fn conflicting_hops_produce_investigation_sets() {
        // P2 claims (P1, P2, P3); P1 claims (P4, P1, P3); P3 claims (P1, P3, P6).
        let report = validate(&[hop(1, 2, 3), hop(4, 1, 3), hop(1, 3, 6)]);
        // The mechanical degree rules resolve P4 as the only origin claimant,
        // but the contradictory attestations surface as transit faults on P1
        // (out-degree 3) and P3 (in-degree 3): manual investigation required.
        assert_eq!(report.origin_candidates, BTreeSet::from([CarrierId(4)]));
        assert!(!report.faulty.is_empty());
        assert_eq!(
            report.faulty.transit,
            BTreeSet::from([CarrierId(1), CarrierId(3)])
        );
        assert!(report.connected);
    }

    #[test]
    fn conflicting_origin_claims_split_true_and_faulty() {
        // Two full claimants with out-degree 2 each: both plausible, no
        // resolution; a third claimant with out-degree 1 lands in the faulty
        // origin set.
        let hops = vec![origin_hop(1, 3), hop(1, 3, 4), origin_hop(2, 3), hop(2, 3, 4), term_hop(3, 4), origin_hop(5, 3)];
        let report = validate(&hops);
        assert_eq!(report.origin, None);
        assert_eq!(
            report.origin_candidates,
            BTreeSet::from([CarrierId(1), CarrierId(2), CarrierId(5)])
        );
        assert_eq!(report.faulty.origin, BTreeSet::from([CarrierId(5)]));
        // One candidate path per plausible origin.
        let origins: Vec<CarrierId> = report.paths.iter().map(|p| p.origin).collect();
        assert_eq!(origins, vec![CarrierId(1), CarrierId(2)]);
    }

    #[test]
    fn disconnected_graphs_report_subgraphs() {
        let report = validate(&[hop(1, 2, 3), hop(7, 8, 9)]);
        assert!(!report.connected);
        assert_eq!(report.subgraphs.len(), 2);
        assert_eq!(
            report.subgraphs[0].vertices,
            vec![CarrierId(1), CarrierId(2), CarrierId(3)]
        );
        assert!(report.paths.is_empty());
    }

    #[test]
    fn empty_input_yields_empty_report() {
        let report = validate(&[]);
        assert_eq!(report, ValidationReport::default());
    }

    #[test]
    fn duplicate_submissions_do_not_create_faults() {
        let mut hops = ideal_path(4);
        hops.extend(ideal_path(4));
        hops.push(hops[1]); // a third copy of one record
        let report = validate(&hops);
        assert!(report.faulty.is_empty());
        assert_eq!(report.origin, Some(CarrierId(1)));
        assert_eq!(
            report.call_path().unwrap(),
            &[CarrierId(1), CarrierId(2), CarrierId(3), CarrierId(4)]
        );
    }

    #[test]
    fn report_is_order_independent() {
        let mut hops = ideal_path(5);
        hops.push(hop(9, 3, 1)); // stray conflicting hop
        let a = validate(&hops);
        hops.reverse();
        let b = validate(&hops);
        hops.swap(0, 3);
        let c = validate(&hops);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn classification_partitions_vertices() {
        let hops = vec![hop(1, 2, 3), hop(4, 1, 3), hop(1, 3, 6), origin_hop(9, 1)];
        let report = validate(&hops);
        let g = build_multigraph(&hops);
        let mut union = BTreeSet::new();
        for set in [&report.origin_candidates, &report.terminator_candidates, &report.transit] {
            for v in set {
                assert!(union.insert(*v), "sets must be disjoint");
            }
        }
        assert_eq!(union, g.vertices);
    }

    #[test]
    fn shortest_path_prefers_fewest_edges_then_lexicographic() {
        // Diamond: 1 -> 2 -> 4 and 1 -> 3 -> 4 are both two edges; the
        // tie-break picks the path through 2.
        let g = build_multigraph(&[origin_hop(1, 2), hop(1, 2, 4), origin_hop(1, 3), hop(1, 3, 4)]);
        assert_eq!(
            shortest_path(&g, CarrierId(1), CarrierId(4)).unwrap(),
            vec![CarrierId(1), CarrierId(2), CarrierId(4)]
        );
        // Longer detour exists but the two-edge route wins.
        let g = build_multigraph(&[hop(1, 2, 4), hop(2, 4, 5), hop(1, 7, 8), hop(7, 8, 4)]);
        assert_eq!(
            shortest_path(&g, CarrierId(1), CarrierId(5)).unwrap(),
            vec![CarrierId(1), CarrierId(2), CarrierId(4), CarrierId(5)]
        );
        assert_eq!(shortest_path(&g, CarrierId(5), CarrierId(1)), None);
    }

    #[test]
    fn report_serializes_to_json() {
        let report = validate(&ideal_path(3));
        let json = serde_json::to_string(&report).unwrap();
        let back: ValidationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
