//! Descriptive statistics over ground truth instances.
//!
//! Two families: community dynamics (how memberships move between
//! consecutive snapshots) and network properties (how each snapshot
//! graph looks). Both are pure functions of the instance, so campaign
//! aggregation stays reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::model::{CommunityId, EvolvingCommunity, GroundTruth, NodeId, Snapshot};

/// Largest connected component size for which distances are computed
/// exactly, with a BFS from every node.
pub const DEFAULT_DISTANCE_LIMIT: usize = 2048;

/// Number of evenly spaced BFS sources used beyond the exact limit.
const SAMPLED_SOURCES: usize = 256;

/// Whether a community survives into `t + 1` or disappears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    Survival,
    Death,
}

/// Membership movement of one community over the transition `t -> t+1`.
///
/// Turnover, size change and predecessor count describe the next state
/// and exist only for survivals; the emigrant ratio (members that moved
/// to some other community while this one still had a claim on them)
/// is also defined on the transition where the community dies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityDynamics {
    pub community: CommunityId,
    pub t: usize,
    pub kind: TransitionKind,
    /// Fraction of the next state's members that are new.
    pub turnover: Option<f64>,
    /// Relative size change of the next state.
    pub size_change: Option<f64>,
    /// Fraction of current members active at `t + 1` outside this
    /// community.
    pub emigrant_ratio: f64,
    /// Number of communities at `t` sharing members with the next state.
    pub n_predecessors: Option<usize>,
}

/// All nodes belonging to any community at `t`.
pub fn active_nodes_at(communities: &[EvolvingCommunity], t: usize) -> BTreeSet<NodeId> {
    communities
        .iter()
        .filter_map(|c| c.at(t))
        .flat_map(|sc| sc.members.iter().copied())
        .collect()
}

/// Per-transition membership dynamics for every community.
pub fn community_dynamics(
    communities: &[EvolvingCommunity],
    timesteps: usize,
) -> Vec<CommunityDynamics> {
    let active: Vec<BTreeSet<NodeId>> = (0..timesteps)
        .map(|t| active_nodes_at(communities, t))
        .collect();
    let mut sorted: Vec<&EvolvingCommunity> = communities.iter().collect();
    sorted.sort_by_key(|c| c.id);

    let mut records = Vec::new();
    for community in &sorted {
        for state in &community.sequence {
            let t = state.t;
            if t + 1 >= timesteps {
                break;
            }
            match community.at(t + 1) {
                Some(next) => {
                    let new = next.members.difference(&state.members).count();
                    let emigrants = state
                        .members
                        .iter()
                        .filter(|n| active[t + 1].contains(n) && !next.members.contains(n))
                        .count();
                    let n_predecessors = sorted
                        .iter()
                        .filter(|other| {
                            other
                                .at(t)
                                .is_some_and(|sc| !sc.members.is_disjoint(&next.members))
                        })
                        .count();
                    records.push(CommunityDynamics {
                        community: community.id,
                        t,
                        kind: TransitionKind::Survival,
                        turnover: Some(new as f64 / next.size() as f64),
                        size_change: Some(
                            (next.size() as f64 - state.size() as f64) / state.size() as f64,
                        ),
                        emigrant_ratio: emigrants as f64 / state.size() as f64,
                        n_predecessors: Some(n_predecessors),
                    });
                }
                None => {
                    let emigrants = state
                        .members
                        .iter()
                        .filter(|n| active[t + 1].contains(n))
                        .count();
                    records.push(CommunityDynamics {
                        community: community.id,
                        t,
                        kind: TransitionKind::Death,
                        turnover: None,
                        size_change: None,
                        emigrant_ratio: emigrants as f64 / state.size() as f64,
                        n_predecessors: None,
                    });
                }
            }
        }
    }
    records
}

/// Fraction of nodes at each `t >= 1` that were not active at `t - 1`.
///
/// Timesteps with no active nodes are skipped.
pub fn system_renewal(communities: &[EvolvingCommunity], timesteps: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut previous = active_nodes_at(communities, 0);
    for t in 1..timesteps {
        let current = active_nodes_at(communities, t);
        if !current.is_empty() {
            let fresh = current.difference(&previous).count();
            out.push((t, fresh as f64 / current.len() as f64));
        }
        previous = current;
    }
    out
}

/// Size of one community at each timestep of its life.
pub fn size_trajectories(communities: &[EvolvingCommunity]) -> Vec<(CommunityId, Vec<(usize, usize)>)> {
    let mut sorted: Vec<&EvolvingCommunity> = communities.iter().collect();
    sorted.sort_by_key(|c| c.id);
    sorted
        .iter()
        .map(|c| {
            let path = c.sequence.iter().map(|sc| (sc.t, sc.size())).collect();
            (c.id, path)
        })
        .collect()
}

/// Mean, sample standard deviation and range of a value series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Summarizes a series; `None` when it is empty.
pub fn summarize(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(Summary {
        n,
        mean,
        std: var.sqrt(),
        min,
        max,
    })
}

/// Newman modularity of a node assignment on one snapshot.
///
/// `Q = sum_c (e_c / m - (d_c / 2m)^2)` over communities `c`, with
/// `e_c` intra-community edges, `d_c` total member degree and `m` the
/// edge count. A snapshot without edges scores 0.
pub fn modularity(snapshot: &Snapshot, assignment: &BTreeMap<NodeId, CommunityId>) -> f64 {
    let m = snapshot.n_edges() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut intra: BTreeMap<CommunityId, usize> = BTreeMap::new();
    let mut degree: BTreeMap<CommunityId, usize> = BTreeMap::new();
    for &(u, v) in &snapshot.edges {
        if let (Some(&cu), Some(&cv)) = (assignment.get(&u), assignment.get(&v)) {
            *degree.entry(cu).or_insert(0) += 1;
            *degree.entry(cv).or_insert(0) += 1;
            if cu == cv {
                *intra.entry(cu).or_insert(0) += 1;
            }
        }
    }
    degree
        .iter()
        .map(|(c, &d)| {
            let e = *intra.get(c).unwrap_or(&0) as f64;
            e / m - (d as f64 / (2.0 * m)).powi(2)
        })
        .sum()
}

/// Structure of one snapshot graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProperties {
    pub t: usize,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_communities: usize,
    pub mean_degree: f64,
    /// Modularity of the planted assignment.
    pub modularity: f64,
    /// Mean local clustering coefficient; nodes of degree below two
    /// contribute zero.
    pub avg_clustering: f64,
    pub largest_component: usize,
    /// Longest shortest path within the largest component; `None` when
    /// the snapshot has no edges.
    pub diameter: Option<usize>,
    /// Mean pairwise distance within the largest component.
    pub avg_shortest_path: Option<f64>,
    /// False when distances were estimated from sampled BFS sources.
    pub exact_distances: bool,
    /// True when the snapshot has no edges at all.
    pub degenerate: bool,
}

fn connected_components(adj: &BTreeMap<NodeId, Vec<NodeId>>) -> Vec<Vec<NodeId>> {
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut components = Vec::new();
    for &start in adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(node) = queue.pop_front() {
            component.push(node);
            for &next in &adj[&node] {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        components.push(component);
    }
    components
}

/// BFS distances from `source` over dense indices; unreachable slots
/// stay `usize::MAX`.
fn bfs_distances(start: usize, neighbors: &[Vec<usize>]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; neighbors.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        for &next in &neighbors[node] {
            if dist[next] == usize::MAX {
                dist[next] = dist[node] + 1;
                queue.push_back(next);
            }
        }
    }
    dist
}

struct DistanceStats {
    diameter: usize,
    avg_path: f64,
    exact: bool,
}

fn distance_stats(
    component: &[NodeId],
    adj: &BTreeMap<NodeId, Vec<NodeId>>,
    exact_limit: usize,
) -> DistanceStats {
    let mut nodes = component.to_vec();
    nodes.sort_unstable();
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let neighbors: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| adj[n].iter().map(|m| index[m]).collect())
        .collect();

    let exact = nodes.len() <= exact_limit;
    let sources: Vec<usize> = if exact {
        (0..nodes.len()).collect()
    } else {
        // Evenly spaced deterministic sources; close enough for reporting
        // and stable across runs.
        let stride = nodes.len() as f64 / SAMPLED_SOURCES as f64;
        (0..SAMPLED_SOURCES)
            .map(|i| (i as f64 * stride) as usize)
            .collect()
    };

    let mut diameter = 0usize;
    let mut total = 0u64;
    let mut pairs = 0u64;
    for &source in &sources {
        let dist = bfs_distances(source, &neighbors);
        for (i, &d) in dist.iter().enumerate() {
            if i == source || d == usize::MAX {
                continue;
            }
            diameter = diameter.max(d);
            total += d as u64;
            pairs += 1;
        }
    }
    DistanceStats {
        diameter,
        avg_path: if pairs == 0 {
            0.0
        } else {
            total as f64 / pairs as f64
        },
        exact,
    }
}

fn local_clustering(adj: &BTreeMap<NodeId, Vec<NodeId>>) -> f64 {
    if adj.is_empty() {
        return 0.0;
    }
    let sets: BTreeMap<NodeId, BTreeSet<NodeId>> = adj
        .iter()
        .map(|(&n, nbrs)| (n, nbrs.iter().copied().collect()))
        .collect();
    let mut sum = 0.0;
    for nbrs in adj.values() {
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for i in 0..k {
            for j in (i + 1)..k {
                if sets[&nbrs[i]].contains(&nbrs[j]) {
                    links += 1;
                }
            }
        }
        sum += links as f64 / (k * (k - 1) / 2) as f64;
    }
    sum / adj.len() as f64
}

/// Computes the properties of one snapshot given its planted assignment.
pub fn snapshot_properties(
    snapshot: &Snapshot,
    assignment: &BTreeMap<NodeId, CommunityId>,
    n_communities: usize,
    exact_limit: usize,
) -> NetworkProperties {
    let adj = snapshot.adjacency();
    let n_nodes = snapshot.n_nodes();
    let n_edges = snapshot.n_edges();
    let degenerate = n_edges == 0;

    let components = connected_components(&adj);
    let largest = components.iter().max_by_key(|c| c.len());
    let largest_size = largest.map_or(0, |c| c.len());

    let distances = match largest {
        Some(component) if !degenerate => Some(distance_stats(component, &adj, exact_limit)),
        _ => None,
    };

    NetworkProperties {
        t: snapshot.t,
        n_nodes,
        n_edges,
        n_communities,
        mean_degree: if n_nodes == 0 {
            0.0
        } else {
            2.0 * n_edges as f64 / n_nodes as f64
        },
        modularity: modularity(snapshot, assignment),
        avg_clustering: local_clustering(&adj),
        largest_component: largest_size,
        diameter: distances.as_ref().map(|d| d.diameter),
        avg_shortest_path: distances.as_ref().map(|d| d.avg_path),
        exact_distances: distances.as_ref().is_none_or(|d| d.exact),
        degenerate,
    }
}

/// Properties of every snapshot of a ground truth instance.
pub fn network_properties(truth: &GroundTruth) -> Vec<NetworkProperties> {
    network_properties_with_limit(truth, DEFAULT_DISTANCE_LIMIT)
}

/// Like [`network_properties`] with a custom exact-distance limit.
pub fn network_properties_with_limit(
    truth: &GroundTruth,
    exact_limit: usize,
) -> Vec<NetworkProperties> {
    truth
        .snapshots
        .iter()
        .map(|snapshot| {
            let assignment = truth.assignment_at(snapshot.t);
            let n_communities = truth.communities_at(snapshot.t).len();
            snapshot_properties(snapshot, &assignment, n_communities, exact_limit)
        })
        .collect()
}
