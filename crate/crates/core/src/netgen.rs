//! Snapshot graph generation over planted communities.
//!
//! Every snapshot is an independent stochastic block model draw: node
//! pairs inside a community connect with probability `p_in`, pairs across
//! communities with `p_out`. Rather than flipping a coin per pair, blocks
//! are sampled with geometric jumps between selected pairs, which costs
//! time proportional to the number of edges drawn instead of the number
//! of candidate pairs.
//!
//! Draw order is fixed (intra-community blocks by community id, then
//! cross blocks by id pair), so a snapshot is a pure function of the
//! community structure, the probabilities, and its RNG substream.

use rand::Rng;
use rayon::prelude::*;

use crate::model::{EvolvingCommunity, NodeId, Snapshot, StaticCommunity};
use crate::sampling::RngStream;

/// Selects indices from `0..total` independently with probability `p`,
/// jumping geometrically between hits.
fn sample_indices(total: u64, p: f64, stream: &mut RngStream) -> Vec<u64> {
    if total == 0 || p <= 0.0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..total).collect();
    }
    let log_skip = (1.0 - p).ln();
    let mut out = Vec::with_capacity((total as f64 * p * 1.1) as usize + 4);
    let mut cursor: u64 = 0;
    loop {
        let r: f64 = stream.rng().gen();
        let gap = ((1.0 - r).ln() / log_skip).floor().min(total as f64) as u64;
        cursor = match cursor.checked_add(gap) {
            Some(c) if c < total => c,
            _ => break,
        };
        out.push(cursor);
        cursor += 1;
    }
    out
}

/// Maps a linear index to the `m`-th unordered pair `(i, j)`, `i < j`,
/// over `size` items, in row-major order: (0,1), (0,2), ..., (1,2), ...
fn unordered_pair_at(m: u64, size: u64) -> (usize, usize) {
    debug_assert!(m < size * (size - 1) / 2);
    // Row i starts at offset i*(size-1) - i*(i-1)/2; invert by solving the
    // quadratic, then correct any floating point slip locally.
    let offset = |i: u64| i * (size - 1) - i * i.saturating_sub(1) / 2;
    let mf = m as f64;
    let sf = size as f64;
    let mut i = ((2.0 * sf - 1.0 - ((2.0 * sf - 1.0).powi(2) - 8.0 * mf).sqrt()) / 2.0) as u64;
    i = i.min(size - 2);
    while offset(i) > m {
        i -= 1;
    }
    while i < size - 2 && offset(i + 1) <= m {
        i += 1;
    }
    let j = i + 1 + (m - offset(i));
    (i as usize, j as usize)
}

/// One stochastic block model draw for the communities present at `t`.
///
/// Active nodes are exactly the communities' members; nodes keep their
/// slot in the snapshot even when the draw leaves them isolated.
pub fn generate_snapshot(
    t: usize,
    communities: &[&StaticCommunity],
    p_in: f64,
    p_out: f64,
    stream: &mut RngStream,
) -> Snapshot {
    let mut blocks: Vec<(&StaticCommunity, Vec<NodeId>)> = communities
        .iter()
        .map(|c| (*c, c.members.iter().copied().collect::<Vec<_>>()))
        .collect();
    blocks.sort_by_key(|(c, _)| c.evolving_id);

    let mut snapshot = Snapshot::new(t);
    for (_, members) in &blocks {
        snapshot.active_nodes.extend(members.iter().copied());
    }

    for (_, members) in &blocks {
        let s = members.len() as u64;
        if s < 2 {
            continue;
        }
        for m in sample_indices(s * (s - 1) / 2, p_in, stream) {
            let (i, j) = unordered_pair_at(m, s);
            snapshot.insert_edge(members[i], members[j]);
        }
    }

    for a in 0..blocks.len() {
        for b in (a + 1)..blocks.len() {
            let left = &blocks[a].1;
            let right = &blocks[b].1;
            let cols = right.len() as u64;
            for m in sample_indices(left.len() as u64 * cols, p_out, stream) {
                snapshot.insert_edge(left[(m / cols) as usize], right[(m % cols) as usize]);
            }
        }
    }
    snapshot
}

/// Draws every snapshot of the horizon in parallel.
///
/// Snapshot `t` uses substream `t` of `edges_stream`, so the result is
/// identical whatever the thread count.
pub fn generate_all(
    communities: &[EvolvingCommunity],
    timesteps: usize,
    p_in: f64,
    p_out: f64,
    edges_stream: &RngStream,
) -> Vec<Snapshot> {
    (0..timesteps)
        .into_par_iter()
        .map(|t| {
            let at_t: Vec<&StaticCommunity> =
                communities.iter().filter_map(|c| c.at(t)).collect();
            let mut stream = edges_stream.substream(t as u64);
            generate_snapshot(t, &at_t, p_in, p_out, &mut stream)
        })
        .collect()
}
