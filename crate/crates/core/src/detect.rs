//! Built-in baseline detector: per-snapshot Louvain plus greedy
//! cross-snapshot matching.
//!
//! Each snapshot is clustered independently by Louvain modularity
//! optimization (strict-gain local moves in seeded random visit order,
//! ties broken toward the smallest community, then graph aggregation,
//! repeated until nothing improves). Detected communities are then
//! stitched into evolving labels: a community inherits the label of the
//! previous-snapshot community with the highest Jaccard overlap at or
//! above the match threshold, assigned greedily; everything unmatched
//! starts a fresh label.
//!
//! The detector sees only the graphs, never the planted communities.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use crate::model::{NodeId, PartitionSource, Snapshot, TemporalPartition};
use crate::sampling::RngStream;

/// Detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Louvain resolution: larger values favor more, smaller communities.
    pub resolution: f64,
    /// Minimum Jaccard overlap for a community to inherit a label.
    pub match_threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            resolution: 1.0,
            match_threshold: 0.3,
        }
    }
}

/// One coarsening level of the graph: off-diagonal adjacency, loop
/// weight per node, weighted degree (loops count twice) and the total
/// weight `2m`.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl LevelGraph {
    fn len(&self) -> usize {
        self.adj.len()
    }
}

fn level_from_snapshot(snapshot: &Snapshot) -> (Vec<NodeId>, LevelGraph) {
    let nodes: Vec<NodeId> = snapshot.active_nodes.iter().copied().collect();
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut adj = vec![Vec::new(); nodes.len()];
    for &(u, v) in &snapshot.edges {
        let (i, j) = (index[&u], index[&v]);
        adj[i].push((j, 1.0));
        adj[j].push((i, 1.0));
    }
    let degree: Vec<f64> = adj.iter().map(|nbrs| nbrs.len() as f64).collect();
    let total_weight = degree.iter().sum();
    let self_loop = vec![0.0; nodes.len()];
    (
        nodes,
        LevelGraph {
            adj,
            self_loop,
            degree,
            total_weight,
        },
    )
}

/// One sweep phase of local moves. Returns the node-to-community map
/// and whether any node moved at all.
fn local_move(graph: &LevelGraph, gamma: f64, stream: &mut RngStream) -> (Vec<usize>, bool) {
    let n = graph.len();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot: Vec<f64> = graph.degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let mut any_move = false;

    loop {
        let mut moved = 0usize;
        order.shuffle(stream.rng());
        for &i in &order {
            let c0 = comm[i];
            tot[c0] -= graph.degree[i];

            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, w) in &graph.adj[i] {
                *links.entry(comm[j]).or_insert(0.0) += w;
            }
            let gain = |c: usize, k_ic: f64| {
                k_ic - gamma * tot[c] * graph.degree[i] / graph.total_weight
            };

            let stay = gain(c0, links.get(&c0).copied().unwrap_or(0.0));
            let mut best_c = c0;
            let mut best_gain = stay;
            for (&c, &k_ic) in &links {
                if c == c0 {
                    continue;
                }
                let g = gain(c, k_ic);
                if g > best_gain {
                    best_c = c;
                    best_gain = g;
                }
            }

            comm[i] = best_c;
            tot[best_c] += graph.degree[i];
            if best_c != c0 {
                moved += 1;
            }
        }
        any_move |= moved > 0;
        if moved == 0 {
            break;
        }
    }
    (comm, any_move)
}

/// Renumbers communities densely in order of their smallest node index.
fn renumber(comm: &[usize]) -> (Vec<usize>, usize) {
    let mut mapping: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(comm.len());
    for &c in comm {
        let next = mapping.len();
        out.push(*mapping.entry(c).or_insert(next));
    }
    let count = mapping.len();
    (out, count)
}

fn aggregate(graph: &LevelGraph, comm: &[usize], n_comms: usize) -> LevelGraph {
    let mut self_loop = vec![0.0; n_comms];
    let mut cross: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..graph.len() {
        self_loop[comm[i]] += graph.self_loop[i];
        for &(j, w) in &graph.adj[i] {
            if j <= i {
                continue;
            }
            if comm[i] == comm[j] {
                self_loop[comm[i]] += w;
            } else {
                let key = (comm[i].min(comm[j]), comm[i].max(comm[j]));
                *cross.entry(key).or_insert(0.0) += w;
            }
        }
    }
    let mut adj = vec![Vec::new(); n_comms];
    for (&(a, b), &w) in &cross {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let degree: Vec<f64> = (0..n_comms)
        .map(|c| adj[c].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self_loop[c])
        .collect();
    let total_weight = degree.iter().sum();
    LevelGraph {
        adj,
        self_loop,
        degree,
        total_weight,
    }
}

/// Louvain clusters of one snapshot, sorted by their smallest member.
///
/// A snapshot without edges decomposes into singletons.
pub fn louvain_clusters(
    snapshot: &Snapshot,
    resolution: f64,
    stream: &mut RngStream,
) -> Vec<BTreeSet<NodeId>> {
    let (nodes, mut graph) = level_from_snapshot(snapshot);
    let mut assignment: Vec<usize> = (0..nodes.len()).collect();

    if graph.total_weight > 0.0 {
        loop {
            let (comm, improved) = local_move(&graph, resolution, stream);
            if !improved {
                break;
            }
            let (dense, n_comms) = renumber(&comm);
            for slot in assignment.iter_mut() {
                *slot = dense[*slot];
            }
            if n_comms == graph.len() {
                break;
            }
            graph = aggregate(&graph, &dense, n_comms);
        }
    }

    let mut clusters: BTreeMap<usize, BTreeSet<NodeId>> = BTreeMap::new();
    for (i, &c) in assignment.iter().enumerate() {
        clusters.entry(c).or_default().insert(nodes[i]);
    }
    let mut out: Vec<BTreeSet<NodeId>> = clusters.into_values().collect();
    out.sort_by_key(|c| *c.iter().next().expect("clusters are nonempty"));
    out
}

fn jaccard(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    let shared = a.intersection(b).count();
    let union = a.len() + b.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// Greedily matches current clusters to previous labels by Jaccard
/// overlap. Returns, per cluster, the inherited label if any.
///
/// Candidate pairs at or above the threshold are taken best first; ties
/// prefer the older label, then the earlier cluster. Each label and
/// each cluster is used at most once.
fn greedy_match(
    previous: &[(u32, BTreeSet<NodeId>)],
    clusters: &[BTreeSet<NodeId>],
    threshold: f64,
) -> Vec<Option<u32>> {
    struct Candidate {
        overlap: f64,
        label: u32,
        cluster: usize,
    }
    let mut candidates = Vec::new();
    for (label, members) in previous {
        for (c, cluster) in clusters.iter().enumerate() {
            let overlap = jaccard(members, cluster);
            if overlap >= threshold {
                candidates.push(Candidate {
                    overlap,
                    label: *label,
                    cluster: c,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.overlap
            .total_cmp(&a.overlap)
            .then(a.label.cmp(&b.label))
            .then(a.cluster.cmp(&b.cluster))
    });

    let mut used_labels: BTreeSet<u32> = BTreeSet::new();
    let mut matched: Vec<Option<u32>> = vec![None; clusters.len()];
    for c in candidates {
        if used_labels.contains(&c.label) || matched[c.cluster].is_some() {
            continue;
        }
        used_labels.insert(c.label);
        matched[c.cluster] = Some(c.label);
    }
    matched
}

/// Runs the detector over a snapshot sequence.
///
/// Snapshot `t` is clustered with RNG substream `t`, so results are
/// independent of processing order; labels are numeric strings minted
/// in order of first appearance.
pub fn detect_communities(
    snapshots: &[Snapshot],
    config: &DetectorConfig,
    seed: u64,
) -> TemporalPartition {
    let stream = RngStream::new(seed, "louvain");
    let mut partition = TemporalPartition::new(snapshots.len(), PartitionSource::Detected);
    let mut previous: Vec<(u32, BTreeSet<NodeId>)> = Vec::new();
    let mut next_label = 0u32;

    for (t, snapshot) in snapshots.iter().enumerate() {
        let mut sub = stream.substream(t as u64);
        let clusters = louvain_clusters(snapshot, config.resolution, &mut sub);
        let matched = greedy_match(&previous, &clusters, config.match_threshold);

        previous = clusters
            .into_iter()
            .zip(matched)
            .map(|(cluster, label)| {
                let label = label.unwrap_or_else(|| {
                    let fresh = next_label;
                    next_label += 1;
                    fresh
                });
                let interned = partition.intern(&label.to_string());
                for &node in &cluster {
                    partition.assign(t, node, interned);
                }
                (label, cluster)
            })
            .collect();
    }
    partition
}
