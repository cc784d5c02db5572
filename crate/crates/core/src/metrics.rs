//! Partition comparison metrics.
//!
//! Everything is computed from a contingency matrix between two labelings
//! of the same item set. Five scores are offered: normalized mutual
//! information (arithmetic-mean or max normalization), a variation of
//! information similarity, adjusted Rand index, pair-counting Jaccard,
//! and a size-weighted best-match F1. All similarities except ARI live in
//! [0, 1]; ARI can go negative for partitions that disagree more than
//! chance would. Entropies use natural logarithms with the convention
//! `0 ln 0 = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::model::TemporalPartition;

/// Joint label counts for two labelings of one item set.
#[derive(Debug, Clone)]
pub struct ContingencyMatrix {
    counts: Vec<Vec<u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyMatrix {
    /// Builds the matrix from two parallel label slices: item `i` has
    /// left label `left[i]` and right label `right[i]`.
    pub fn from_labels<L: Ord, R: Ord>(left: &[L], right: &[R]) -> Result<Self, EvalError> {
        if left.len() != right.len() {
            return Err(EvalError::ItemSetMismatch {
                detail: format!(
                    "{} items labeled on the left vs {} on the right",
                    left.len(),
                    right.len()
                ),
            });
        }
        if left.is_empty() {
            return Err(EvalError::EmptyComparison);
        }
        let mut row_of: BTreeMap<&L, usize> = BTreeMap::new();
        for label in left {
            let next = row_of.len();
            row_of.entry(label).or_insert(next);
        }
        let mut col_of: BTreeMap<&R, usize> = BTreeMap::new();
        for label in right {
            let next = col_of.len();
            col_of.entry(label).or_insert(next);
        }

        let mut counts = vec![vec![0u64; col_of.len()]; row_of.len()];
        for (l, r) in left.iter().zip(right) {
            counts[row_of[l]][col_of[r]] += 1;
        }
        let row_sums: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
        let mut col_sums = vec![0u64; col_of.len()];
        for row in &counts {
            for (c, v) in row.iter().enumerate() {
                col_sums[c] += v;
            }
        }
        Ok(ContingencyMatrix {
            counts,
            row_sums,
            col_sums,
            total: left.len() as u64,
        })
    }

    /// Builds the matrix from two assignments over the exact same keys.
    pub fn from_assignments<K, L, R>(
        left: &BTreeMap<K, L>,
        right: &BTreeMap<K, R>,
    ) -> Result<Self, EvalError>
    where
        K: Ord + fmt::Display,
        L: Ord + Copy,
        R: Ord + Copy,
    {
        if left.len() != right.len() || left.keys().ne(right.keys()) {
            let example = left
                .keys()
                .find(|k| !right.contains_key(k))
                .or_else(|| right.keys().find(|k| !left.contains_key(k)));
            return Err(EvalError::ItemSetMismatch {
                detail: match example {
                    Some(k) => format!(
                        "{} vs {} items; e.g. {} is on one side only",
                        left.len(),
                        right.len(),
                        k
                    ),
                    None => format!("{} vs {} items", left.len(), right.len()),
                },
            });
        }
        let l: Vec<L> = left.values().copied().collect();
        let r: Vec<R> = right.values().copied().collect();
        Self::from_labels(&l, &r)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_rows(&self) -> usize {
        self.row_sums.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_sums.len()
    }

    fn entropy(sums: &[u64], total: u64) -> f64 {
        let n = total as f64;
        sums.iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    pub fn row_entropy(&self) -> f64 {
        Self::entropy(&self.row_sums, self.total)
    }

    pub fn col_entropy(&self) -> f64 {
        Self::entropy(&self.col_sums, self.total)
    }

    /// Entropy of the joint cell distribution.
    pub fn joint_entropy(&self) -> f64 {
        let cells: Vec<u64> = self
            .counts
            .iter()
            .flat_map(|row| row.iter().copied())
            .collect();
        Self::entropy(&cells, self.total)
    }

    /// Mutual information in nats, clamped at zero.
    ///
    /// Computed as `H(rows) + H(cols) - H(cells)`. For identical
    /// labelings the cell terms are the row terms, so the difference
    /// cancels exactly and normalized scores come out as exactly 1.
    pub fn mutual_information(&self) -> f64 {
        (self.row_entropy() + self.col_entropy() - self.joint_entropy()).max(0.0)
    }

    /// Agreement counts over unordered item pairs.
    pub fn pair_counts(&self) -> PairCounts {
        let choose2 = |x: u64| x * x.saturating_sub(1) / 2;
        let both: u64 = self
            .counts
            .iter()
            .flat_map(|row| row.iter())
            .map(|&v| choose2(v))
            .sum();
        let left: u64 = self.row_sums.iter().map(|&v| choose2(v)).sum();
        let right: u64 = self.col_sums.iter().map(|&v| choose2(v)).sum();
        let all = choose2(self.total);
        PairCounts {
            both,
            left_only: left - both,
            right_only: right - both,
            neither: all + both - left - right,
        }
    }
}

/// How many unordered pairs each labeling groups together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Pairs co-clustered on both sides.
    pub both: u64,
    /// Pairs co-clustered on the left only.
    pub left_only: u64,
    /// Pairs co-clustered on the right only.
    pub right_only: u64,
    /// Pairs separated on both sides.
    pub neither: u64,
}

/// Normalization used by [`nmi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    /// Divide mutual information by the mean of the two entropies.
    #[default]
    Arithmetic,
    /// Divide mutual information by the larger of the two entropies.
    Max,
}

impl FromStr for NmiNormalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arithmetic" => Ok(NmiNormalization::Arithmetic),
            "max" => Ok(NmiNormalization::Max),
            other => Err(format!(
                "unknown normalization '{other}' (expected arithmetic or max)"
            )),
        }
    }
}

/// Normalized mutual information.
///
/// Two zero-entropy labelings are identical trivial partitions and score
/// 1; when exactly one side has zero entropy there is nothing shared to
/// normalize and the score is 0.
pub fn nmi(m: &ContingencyMatrix, norm: NmiNormalization) -> f64 {
    let (hr, hc) = (m.row_entropy(), m.col_entropy());
    match (hr == 0.0, hc == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => {
            let denom = match norm {
                NmiNormalization::Arithmetic => 0.5 * (hr + hc),
                NmiNormalization::Max => hr.max(hc),
            };
            (m.mutual_information() / denom).min(1.0)
        }
    }
}

/// Variation of information rescaled to a similarity:
/// `1 - VI / ln(n)`, which is 1 for identical partitions and 0 for
/// maximally divergent ones. A single-item comparison scores 1.
pub fn nvi_similarity(m: &ContingencyMatrix) -> f64 {
    if m.total <= 1 {
        return 1.0;
    }
    let vi = (m.row_entropy() + m.col_entropy() - 2.0 * m.mutual_information()).max(0.0);
    1.0 - vi / (m.total as f64).ln()
}

/// Adjusted Rand index. Degenerate marginals (both sides all singletons,
/// or both one single cluster) have zero adjustment range and score 1.
pub fn ari(m: &ContingencyMatrix) -> f64 {
    let choose2 = |x: u64| x * x.saturating_sub(1) / 2;
    let sum_cells: u64 = m
        .counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&v| choose2(v))
        .sum();
    let sum_rows: u64 = m.row_sums.iter().map(|&v| choose2(v)).sum();
    let sum_cols: u64 = m.col_sums.iter().map(|&v| choose2(v)).sum();
    let pairs = choose2(m.total);
    if sum_rows + sum_cols == 0 || (sum_rows == pairs && sum_cols == pairs) {
        return 1.0;
    }
    let expected = sum_rows as f64 * sum_cols as f64 / pairs as f64;
    let max = 0.5 * (sum_rows + sum_cols) as f64;
    (sum_cells as f64 - expected) / (max - expected)
}

/// Jaccard index over co-clustered pairs. When neither side co-clusters
/// any pair the partitions are identical all-singleton labelings: 1.
pub fn pair_jaccard(m: &ContingencyMatrix) -> f64 {
    let p = m.pair_counts();
    let denom = p.both + p.left_only + p.right_only;
    if denom == 0 {
        return 1.0;
    }
    p.both as f64 / denom as f64
}

fn directional_f1(counts: &[Vec<u64>], row_sums: &[u64], col_sums: &[u64], total: u64) -> f64 {
    // Weighting as `sum(size * best) / n` rather than `sum(size/n * best)`
    // keeps the numerator an exact integer sum when every match is
    // perfect, so identical labelings score exactly 1.
    let weighted: f64 = row_sums
        .iter()
        .enumerate()
        .map(|(r, &a)| {
            let best = counts[r]
                .iter()
                .enumerate()
                .map(|(c, &v)| 2.0 * v as f64 / (a + col_sums[c]) as f64)
                .fold(0.0f64, f64::max);
            a as f64 * best
        })
        .sum();
    weighted / total as f64
}

/// Size-weighted best-match F1, symmetrized.
///
/// Each left cluster is matched to the right cluster maximizing their F1
/// overlap, weighted by cluster size; the final score averages the two
/// directions.
pub fn best_match_f1(m: &ContingencyMatrix) -> f64 {
    let forward = directional_f1(&m.counts, &m.row_sums, &m.col_sums, m.total);
    let transposed: Vec<Vec<u64>> = (0..m.n_cols())
        .map(|c| (0..m.n_rows()).map(|r| m.counts[r][c]).collect())
        .collect();
    let backward = directional_f1(&transposed, &m.col_sums, &m.row_sums, m.total);
    0.5 * (forward + backward)
}

/// The partition similarity scores exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nmi,
    Nvi,
    Ari,
    F1,
    Jaccard,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Nmi,
        Metric::Nvi,
        Metric::Ari,
        Metric::F1,
        Metric::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Nmi => "nmi",
            Metric::Nvi => "nvi",
            Metric::Ari => "ari",
            Metric::F1 => "f1",
            Metric::Jaccard => "jaccard",
        }
    }

    pub fn compute(self, m: &ContingencyMatrix, norm: NmiNormalization) -> f64 {
        match self {
            Metric::Nmi => nmi(m, norm),
            Metric::Nvi => nvi_similarity(m),
            Metric::Ari => ari(m),
            Metric::F1 => best_match_f1(m),
            Metric::Jaccard => pair_jaccard(m),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nmi" => Ok(Metric::Nmi),
            "nvi" => Ok(Metric::Nvi),
            "ari" => Ok(Metric::Ari),
            "f1" => Ok(Metric::F1),
            "jaccard" => Ok(Metric::Jaccard),
            other => Err(format!(
                "unknown metric '{other}' (expected nmi, nvi, ari, f1 or jaccard)"
            )),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scores one snapshot of `left` against the same snapshot of `right`.
///
/// Both partitions must label exactly the same nodes at `t`.
pub fn score_snapshot(
    left: &TemporalPartition,
    right: &TemporalPartition,
    t: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<f64, EvalError> {
    if t >= left.timesteps() || t >= right.timesteps() {
        return Err(EvalError::InvalidParameter(format!(
            "t = {t} is outside the compared horizons ({} and {})",
            left.timesteps(),
            right.timesteps()
        )));
    }
    let matrix = ContingencyMatrix::from_assignments(left.assignment_at(t), right.assignment_at(t))?;
    Ok(metric.compute(&matrix, norm))
}

/// Scores every timestep where at least one side has active nodes.
///
/// Timesteps empty on both sides carry no information and are skipped;
/// a timestep empty on one side only is an item set mismatch.
pub fn snapshot_scores(
    left: &TemporalPartition,
    right: &TemporalPartition,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<Vec<(usize, f64)>, EvalError> {
    if left.timesteps() != right.timesteps() {
        return Err(EvalError::HorizonMismatch {
            left: left.timesteps(),
            right: right.timesteps(),
        });
    }
    let mut scores = Vec::new();
    for t in 0..left.timesteps() {
        let l_empty = left.assignment_at(t).is_empty();
        let r_empty = right.assignment_at(t).is_empty();
        if l_empty && r_empty {
            continue;
        }
        scores.push((t, score_snapshot(left, right, t, metric, norm)?));
    }
    Ok(scores)
}
