//! Member assignment: turning skeletons into node-level communities.
//!
//! Nodes cycle through three states. They are active while they belong to
//! a community, idle after leaving one, and never hard-die: an idle node
//! stays eligible for recruitment until the horizon ends.
//!
//! At each transition a surviving community keeps a core of its previous
//! members and fills the remaining slots by priority: first nodes that
//! just left other communities at this transition, then the idle pool,
//! then fresh node ids. A community never recruits the members it just
//! dropped. Newborn communities draw on leavers and fresh ids only; the
//! standing idle pool stays out of births so that a fully retentive
//! scenario (core ratio 1) keeps every node in a single community for its
//! whole life. Members of a dying community are released to the idle pool
//! at the start of the transition, where surviving communities may pick
//! them up immediately.
//!
//! All draws are uniform without replacement and happen in a fixed order
//! (timestep, then community id), so one seed yields one assignment.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{CommunityId, EvolvingCommunity, NodeId, StaticCommunity};
use crate::sampling::RngStream;
use crate::scenario::CommunitySkeleton;

/// Where the members of a community at some timestep came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowSource {
    /// Members that belonged to this community at the previous timestep.
    Community(CommunityId),
    /// Members recruited from the idle pool (active earlier, but not at
    /// the previous timestep).
    Idle,
    /// Fresh node ids that never appeared before.
    Birth,
}

/// Member-flow accounting for one community at one timestep.
///
/// Counts are derived from consecutive membership states: a member's
/// source is its community at `t - 1`, or idle/birth when it had none.
/// The counts sum to the community size at `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: usize,
    pub destination: CommunityId,
    pub sources: BTreeMap<FlowSource, usize>,
}

impl FlowRecord {
    pub fn total(&self) -> usize {
        self.sources.values().sum()
    }
}

/// The reservoir of node ids outside any community.
#[derive(Debug, Clone, Default)]
pub struct NodePool {
    next_fresh: u32,
    idle: BTreeSet<NodeId>,
}

impl NodePool {
    pub fn new() -> Self {
        NodePool::default()
    }

    pub fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next_fresh);
        self.next_fresh += 1;
        id
    }

    pub fn release(&mut self, node: NodeId) {
        self.idle.insert(node);
    }

    pub fn idle_len(&self) -> usize {
        self.idle.len()
    }

    /// Removes up to `count` idle nodes uniformly at random.
    pub fn take_idle(&mut self, count: usize, stream: &mut RngStream) -> Vec<NodeId> {
        let pool: Vec<NodeId> = self.idle.iter().copied().collect();
        let taken = sample_without_replacement(&pool, count, stream);
        for node in &taken {
            self.idle.remove(node);
        }
        taken
    }
}

/// Uniform sample of `count` items without replacement; returns all items
/// when `count >= len`. Deterministic given the stream state.
fn sample_without_replacement<T: Copy + Ord>(
    items: &[T],
    count: usize,
    stream: &mut RngStream,
) -> Vec<T> {
    if count == 0 {
        return Vec::new();
    }
    if count >= items.len() {
        return items.to_vec();
    }
    let mut chosen: Vec<T> = rand::seq::index::sample(stream.rng(), items.len(), count)
        .iter()
        .map(|i| items[i])
        .collect();
    chosen.sort_unstable();
    chosen
}

/// Number of core members a community carries into the next step.
///
/// A hair of slack absorbs binary rounding in `ratio * size` so that exact
/// products like 0.75 * 44 never ceil one slot too high.
fn core_quota(ratio: f64, size: usize) -> usize {
    (((ratio * size as f64) - 1e-9).ceil().max(1.0)) as usize
}

/// Fills every skeleton with members and reports the resulting flows.
///
/// For each consecutive pair of life steps, at least
/// `ceil(core_ratio * current_size)` members are retained, capped by the
/// next target size (a shrinking target truncates the core uniformly at
/// random). Dying communities release their members to the idle pool.
pub fn assign_members(
    skeletons: &[CommunitySkeleton],
    timesteps: usize,
    stream: &mut RngStream,
) -> (Vec<EvolvingCommunity>, Vec<FlowRecord>) {
    let mut order: Vec<&CommunitySkeleton> = skeletons.iter().collect();
    order.sort_by_key(|s| s.id);

    let mut pool = NodePool::new();
    // Current members per community, kept sorted.
    let mut current: BTreeMap<CommunityId, Vec<NodeId>> = BTreeMap::new();
    let mut sequences: BTreeMap<CommunityId, Vec<StaticCommunity>> = BTreeMap::new();

    for t in 0..timesteps {
        // Dying communities release everyone before anything else happens,
        // so survivors can pick the released nodes up this very step.
        for skeleton in &order {
            if t > 0 && skeleton.alive_at(t - 1) && !skeleton.alive_at(t) {
                if let Some(members) = current.remove(&skeleton.id) {
                    for node in members {
                        pool.release(node);
                    }
                }
            }
        }

        // Retention pass: decide every survivor's core before any
        // recruitment, building the transition's leaver pool.
        let mut leavers: BTreeMap<CommunityId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut retained: BTreeMap<CommunityId, Vec<NodeId>> = BTreeMap::new();
        for skeleton in &order {
            if !skeleton.alive_at(t) || t == skeleton.birth_t {
                continue;
            }
            let members = current
                .remove(&skeleton.id)
                .expect("surviving community has previous members");
            let target = skeleton.target_at(t).expect("alive community has a target");
            let quota = core_quota(skeleton.core_ratio, members.len())
                .min(members.len())
                .min(target);
            let kept = sample_without_replacement(&members, quota, stream);
            let kept_set: BTreeSet<NodeId> = kept.iter().copied().collect();
            let dropped: BTreeSet<NodeId> = members
                .into_iter()
                .filter(|n| !kept_set.contains(n))
                .collect();
            if !dropped.is_empty() {
                leavers.insert(skeleton.id, dropped);
            }
            retained.insert(skeleton.id, kept);
        }

        // Recruitment pass, in community id order.
        for skeleton in &order {
            if !skeleton.alive_at(t) {
                continue;
            }
            let newborn = t == skeleton.birth_t;
            let target = skeleton.target_at(t).expect("alive community has a target");
            let mut members = retained.remove(&skeleton.id).unwrap_or_default();

            // Nodes that just left other communities come first.
            if members.len() < target {
                let candidates: Vec<NodeId> = leavers
                    .iter()
                    .filter(|(&source, _)| source != skeleton.id)
                    .flat_map(|(_, nodes)| nodes.iter().copied())
                    .collect();
                let hired =
                    sample_without_replacement(&candidates, target - members.len(), stream);
                for &node in &hired {
                    for nodes in leavers.values_mut() {
                        nodes.remove(&node);
                    }
                }
                members.extend(hired);
            }

            // The standing idle pool serves surviving communities only.
            if !newborn && members.len() < target {
                members.extend(pool.take_idle(target - members.len(), stream));
            }

            while members.len() < target {
                members.push(pool.fresh());
            }
            members.sort_unstable();

            sequences
                .entry(skeleton.id)
                .or_default()
                .push(StaticCommunity {
                    evolving_id: skeleton.id,
                    t,
                    members: members.iter().copied().collect(),
                });
            current.insert(skeleton.id, members);
        }

        // Whoever was dropped and not re-recruited goes idle, eligible
        // again from the next transition on.
        for (_, nodes) in leavers {
            for node in nodes {
                pool.release(node);
            }
        }
    }

    let communities: Vec<EvolvingCommunity> = order
        .iter()
        .map(|skeleton| EvolvingCommunity {
            id: skeleton.id,
            birth_t: skeleton.birth_t,
            sequence: sequences.remove(&skeleton.id).unwrap_or_default(),
        })
        .collect();
    let flows = flow_records(&communities, timesteps);
    (communities, flows)
}

/// Derives flow records from membership states alone.
///
/// A member of community `k` at `t` flowed from its community at `t - 1`
/// if it had one, from the idle pool if it was active at some earlier
/// timestep, and counts as a fresh birth otherwise.
pub fn flow_records(communities: &[EvolvingCommunity], timesteps: usize) -> Vec<FlowRecord> {
    let mut records = Vec::new();
    let mut previous: BTreeMap<NodeId, CommunityId> = BTreeMap::new();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();

    for t in 0..timesteps {
        let mut now: BTreeMap<NodeId, CommunityId> = BTreeMap::new();
        let mut at_t: Vec<&StaticCommunity> = communities.iter().filter_map(|c| c.at(t)).collect();
        at_t.sort_by_key(|c| c.evolving_id);

        for community in at_t {
            let mut sources: BTreeMap<FlowSource, usize> = BTreeMap::new();
            for &node in &community.members {
                let source = match previous.get(&node) {
                    Some(&from) => FlowSource::Community(from),
                    None if seen.contains(&node) => FlowSource::Idle,
                    None => FlowSource::Birth,
                };
                *sources.entry(source).or_insert(0) += 1;
                now.insert(node, community.evolving_id);
            }
            records.push(FlowRecord {
                t,
                destination: community.evolving_id,
                sources,
            });
        }

        seen.extend(previous.keys().copied());
        previous = now;
    }
    records
}

/// Fraction of `next`'s members that were not in `prev`.
pub fn turnover_of_transition(prev: &StaticCommunity, next: &StaticCommunity) -> f64 {
    if next.members.is_empty() {
        return 0.0;
    }
    let new = next
        .members
        .iter()
        .filter(|n| !prev.members.contains(n))
        .count();
    new as f64 / next.members.len() as f64
}
