//! Core data model: snapshots, communities, partitions, ground truth.
//!
//! Node ids are dense integers in `[0, N)`. A node that is inactive at a
//! timestep is simply absent from that snapshot and from every community
//! at that timestep; there is no explicit "inactive" marker. In a valid
//! ground truth every active node belongs to exactly one community.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioConfig;

/// Dense node identifier.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Identifier of an evolving community.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct CommunityId(pub u32);

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An undirected edge, stored with endpoints in ascending order.
pub type Edge = (NodeId, NodeId);

/// One timestep of the temporal network: the active node set and the
/// undirected, unweighted edges among those nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub active_nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Edge>,
}

impl Snapshot {
    pub fn new(t: usize) -> Self {
        Snapshot {
            t,
            active_nodes: BTreeSet::new(),
            edges: BTreeSet::new(),
        }
    }

    /// Inserts an undirected edge, normalising the endpoint order.
    /// Self-loops are ignored; the model has none.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) {
        if u == v {
            return;
        }
        let edge = if u < v { (u, v) } else { (v, u) };
        self.edges.insert(edge);
    }

    pub fn n_nodes(&self) -> usize {
        self.active_nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency lists over active nodes, including isolates.
    pub fn adjacency(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = self
            .active_nodes
            .iter()
            .map(|&n| (n, Vec::new()))
            .collect();
        for &(u, v) in &self.edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        adj
    }
}

/// A community at one timestep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticCommunity {
    pub evolving_id: CommunityId,
    pub t: usize,
    pub members: BTreeSet<NodeId>,
}

impl StaticCommunity {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// A community across its whole life: a consecutive sequence of static
/// communities starting at `birth_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolvingCommunity {
    pub id: CommunityId,
    pub birth_t: usize,
    pub sequence: Vec<StaticCommunity>,
}

impl EvolvingCommunity {
    pub fn lifespan(&self) -> usize {
        self.sequence.len()
    }

    /// Last timestep at which the community is alive.
    pub fn last_t(&self) -> usize {
        self.birth_t + self.lifespan().saturating_sub(1)
    }

    pub fn alive_at(&self, t: usize) -> bool {
        t >= self.birth_t && t < self.birth_t + self.lifespan()
    }

    pub fn at(&self, t: usize) -> Option<&StaticCommunity> {
        if self.alive_at(t) {
            self.sequence.get(t - self.birth_t)
        } else {
            None
        }
    }
}

/// Origin of a temporal partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSource {
    GroundTruth,
    Detected,
}

/// Index into a [`TemporalPartition`]'s label table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u32);

/// Per-timestep community labels for every active node.
///
/// Labels are opaque names (strings for detected partitions, community ids
/// for ground truth) interned into dense [`LabelId`]s. A node appears in
/// the map for timestep `t` exactly when it is active at `t`, and carries
/// exactly one label there.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPartition {
    source: PartitionSource,
    names: Vec<String>,
    index: BTreeMap<String, LabelId>,
    assignments: Vec<BTreeMap<NodeId, LabelId>>,
}

impl TemporalPartition {
    pub fn new(timesteps: usize, source: PartitionSource) -> Self {
        TemporalPartition {
            source,
            names: Vec::new(),
            index: BTreeMap::new(),
            assignments: vec![BTreeMap::new(); timesteps],
        }
    }

    pub fn source(&self) -> PartitionSource {
        self.source
    }

    pub fn timesteps(&self) -> usize {
        self.assignments.len()
    }

    /// Interns a label name, returning its dense id.
    pub fn intern(&mut self, name: &str) -> LabelId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = LabelId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn label_name(&self, label: LabelId) -> &str {
        &self.names[label.0 as usize]
    }

    /// Assigns `node` to the labelled community at `t`, replacing any
    /// previous assignment for that node and timestep.
    pub fn assign(&mut self, t: usize, node: NodeId, label: LabelId) {
        self.assignments[t].insert(node, label);
    }

    pub fn label_of(&self, t: usize, node: NodeId) -> Option<LabelId> {
        self.assignments.get(t).and_then(|m| m.get(&node)).copied()
    }

    /// Nodes active (labelled) at `t`.
    pub fn assignment_at(&self, t: usize) -> &BTreeMap<NodeId, LabelId> {
        &self.assignments[t]
    }

    /// Communities at `t` as label -> member set, every set nonempty.
    pub fn communities_at(&self, t: usize) -> BTreeMap<LabelId, BTreeSet<NodeId>> {
        let mut out: BTreeMap<LabelId, BTreeSet<NodeId>> = BTreeMap::new();
        for (&node, &label) in &self.assignments[t] {
            out.entry(label).or_default().insert(node);
        }
        out
    }

    pub fn n_labels(&self) -> usize {
        self.names.len()
    }
}

/// A complete generated benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub communities: Vec<EvolvingCommunity>,
    pub snapshots: Vec<Snapshot>,
}

impl GroundTruth {
    pub fn timesteps(&self) -> usize {
        self.config.timesteps
    }

    /// Static communities alive at `t`, in id order.
    pub fn communities_at(&self, t: usize) -> Vec<&StaticCommunity> {
        self.communities.iter().filter_map(|c| c.at(t)).collect()
    }

    /// The planted node-to-community assignment at `t`.
    pub fn assignment_at(&self, t: usize) -> BTreeMap<NodeId, CommunityId> {
        let mut out = BTreeMap::new();
        for c in self.communities_at(t) {
            for &n in &c.members {
                out.insert(n, c.evolving_id);
            }
        }
        out
    }

    /// The ground truth as a temporal partition labelled by evolving
    /// community ids.
    pub fn to_partition(&self) -> TemporalPartition {
        let mut p = TemporalPartition::new(self.timesteps(), PartitionSource::GroundTruth);
        for t in 0..self.timesteps() {
            for c in self.communities_at(t) {
                let label = p.intern(&c.evolving_id.to_string());
                for &n in &c.members {
                    p.assign(t, n, label);
                }
            }
        }
        p
    }
}

/// One structural defect found by [`validate`].
///
/// Violations are data, not errors: a loaded or hand-built ground truth is
/// representable even when inconsistent, and the validator reports every
/// defect it finds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An edge endpoint is not active in its snapshot.
    EdgeEndpointInactive { t: usize, edge: Edge, node: NodeId },
    /// An edge joins a node to itself.
    SelfLoop { t: usize, node: NodeId },
    /// A static community is smaller than the configured minimum.
    UndersizedCommunity {
        community: CommunityId,
        t: usize,
        size: usize,
        min_size: usize,
    },
    /// A node belongs to two communities at the same timestep.
    OverlappingMembership {
        t: usize,
        node: NodeId,
        first: CommunityId,
        second: CommunityId,
    },
    /// A community member is not active in the snapshot.
    MemberNotActive {
        community: CommunityId,
        t: usize,
        node: NodeId,
    },
    /// An active node belongs to no community.
    ActiveNodeUncovered { t: usize, node: NodeId },
    /// An evolving community skips a timestep inside its life.
    NonConsecutiveSequence {
        community: CommunityId,
        expected_t: usize,
        found_t: usize,
    },
    /// A community has an empty sequence.
    EmptyLifespan { community: CommunityId },
    /// A community lives outside `[0, timesteps)`.
    LifespanOutOfHorizon {
        community: CommunityId,
        birth_t: usize,
        lifespan: usize,
        horizon: usize,
    },
    /// A static community has no members.
    EmptyCommunity { community: CommunityId, t: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeEndpointInactive { t, edge, node } => write!(
                f,
                "t={t}: edge ({}, {}) touches inactive node {node}",
                edge.0, edge.1
            ),
            Violation::SelfLoop { t, node } => write!(f, "t={t}: self-loop on node {node}"),
            Violation::UndersizedCommunity {
                community,
                t,
                size,
                min_size,
            } => write!(
                f,
                "t={t}: community {community} has {size} members, below minimum {min_size}"
            ),
            Violation::OverlappingMembership {
                t,
                node,
                first,
                second,
            } => write!(
                f,
                "t={t}: node {node} belongs to both community {first} and community {second}"
            ),
            Violation::MemberNotActive { community, t, node } => write!(
                f,
                "t={t}: member {node} of community {community} is not active"
            ),
            Violation::ActiveNodeUncovered { t, node } => {
                write!(f, "t={t}: active node {node} belongs to no community")
            }
            Violation::NonConsecutiveSequence {
                community,
                expected_t,
                found_t,
            } => write!(
                f,
                "community {community}: expected step t={expected_t}, found t={found_t}"
            ),
            Violation::EmptyLifespan { community } => {
                write!(f, "community {community} has an empty life")
            }
            Violation::LifespanOutOfHorizon {
                community,
                birth_t,
                lifespan,
                horizon,
            } => write!(
                f,
                "community {community} lives [{birth_t}, {}) outside horizon {horizon}",
                birth_t + lifespan
            ),
            Violation::EmptyCommunity { community, t } => {
                write!(f, "t={t}: community {community} has no members")
            }
        }
    }
}

/// Checks every structural invariant of a ground truth and returns the
/// violations found, empty when the instance is consistent.
pub fn validate(gt: &GroundTruth) -> Vec<Violation> {
    let mut violations = Vec::new();
    let horizon = gt.timesteps();

    for community in &gt.communities {
        if community.sequence.is_empty() {
            violations.push(Violation::EmptyLifespan {
                community: community.id,
            });
            continue;
        }
        if community.birth_t + community.lifespan() > horizon {
            violations.push(Violation::LifespanOutOfHorizon {
                community: community.id,
                birth_t: community.birth_t,
                lifespan: community.lifespan(),
                horizon,
            });
        }
        for (offset, sc) in community.sequence.iter().enumerate() {
            let expected_t = community.birth_t + offset;
            if sc.t != expected_t {
                violations.push(Violation::NonConsecutiveSequence {
                    community: community.id,
                    expected_t,
                    found_t: sc.t,
                });
            }
            if sc.members.is_empty() {
                violations.push(Violation::EmptyCommunity {
                    community: community.id,
                    t: sc.t,
                });
            }
            if sc.size() < gt.config.min_size {
                violations.push(Violation::UndersizedCommunity {
                    community: community.id,
                    t: sc.t,
                    size: sc.size(),
                    min_size: gt.config.min_size,
                });
            }
        }
    }

    for snapshot in &gt.snapshots {
        let t = snapshot.t;
        for &(u, v) in &snapshot.edges {
            if u == v {
                violations.push(Violation::SelfLoop { t, node: u });
                continue;
            }
            for node in [u, v] {
                if !snapshot.active_nodes.contains(&node) {
                    violations.push(Violation::EdgeEndpointInactive {
                        t,
                        edge: (u, v),
                        node,
                    });
                }
            }
        }

        let mut covered: BTreeMap<NodeId, CommunityId> = BTreeMap::new();
        for community in gt.communities_at(t) {
            for &node in &community.members {
                if !snapshot.active_nodes.contains(&node) {
                    violations.push(Violation::MemberNotActive {
                        community: community.evolving_id,
                        t,
                        node,
                    });
                }
                if let Some(&first) = covered.get(&node) {
                    violations.push(Violation::OverlappingMembership {
                        t,
                        node,
                        first,
                        second: community.evolving_id,
                    });
                } else {
                    covered.insert(node, community.evolving_id);
                }
            }
        }
        for &node in &snapshot.active_nodes {
            if !covered.contains_key(&node) {
                violations.push(Violation::ActiveNodeUncovered { t, node });
            }
        }
    }

    violations
}
