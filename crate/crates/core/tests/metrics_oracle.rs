//! Exhaustive cross-check of the partition metrics.
//!
//! Every pair of partitions over up to six items is enumerated as
//! restricted growth strings and scored twice: once by the library and
//! once by straight-line reference implementations that share no code
//! with it (explicit O(n^2) pair counting, entropy over joint label
//! counts, set-based cluster matching). The two must agree to 1e-12.

use std::collections::{BTreeMap, BTreeSet};

use evocomm::metrics::{
    ari, best_match_f1, nmi, nvi_similarity, pair_jaccard, ContingencyMatrix, NmiNormalization,
};

/// All partitions of `n` items, canonically encoded: the first item has
/// label 0 and each next label is at most one past the current maximum.
fn partitions(n: usize) -> Vec<Vec<u32>> {
    fn recurse(prefix: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let ceiling = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for label in 0..=ceiling {
            prefix.push(label);
            recurse(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    recurse(&mut Vec::new(), n, &mut out);
    out
}

struct BrutePairs {
    both: u64,
    left_only: u64,
    right_only: u64,
    total_pairs: u64,
}

fn brute_pairs(left: &[u32], right: &[u32]) -> BrutePairs {
    let n = left.len();
    let (mut both, mut left_only, mut right_only) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (left[i] == left[j], right[i] == right[j]) {
                (true, true) => both += 1,
                (true, false) => left_only += 1,
                (false, true) => right_only += 1,
                (false, false) => {}
            }
        }
    }
    BrutePairs {
        both,
        left_only,
        right_only,
        total_pairs: (n * n.saturating_sub(1) / 2) as u64,
    }
}

fn brute_ari(left: &[u32], right: &[u32]) -> f64 {
    let p = brute_pairs(left, right);
    let sum_left = p.both + p.left_only;
    let sum_right = p.both + p.right_only;
    let degenerate = (sum_left == 0 && sum_right == 0)
        || (sum_left == p.total_pairs && sum_right == p.total_pairs);
    if degenerate {
        return 1.0;
    }
    let expected = sum_left as f64 * sum_right as f64 / p.total_pairs as f64;
    let max = 0.5 * (sum_left + sum_right) as f64;
    (p.both as f64 - expected) / (max - expected)
}

fn brute_jaccard(left: &[u32], right: &[u32]) -> f64 {
    let p = brute_pairs(left, right);
    let denom = p.both + p.left_only + p.right_only;
    if denom == 0 {
        1.0
    } else {
        p.both as f64 / denom as f64
    }
}

fn entropy_of_counts<I: IntoIterator<Item = u64>>(counts: I, n: f64) -> f64 {
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn marginal_entropy(labels: &[u32]) -> f64 {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    entropy_of_counts(counts.into_values(), labels.len() as f64)
}

fn joint_entropy(left: &[u32], right: &[u32]) -> f64 {
    let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&l, &r) in left.iter().zip(right) {
        *counts.entry((l, r)).or_insert(0) += 1;
    }
    entropy_of_counts(counts.into_values(), left.len() as f64)
}

fn brute_nmi(left: &[u32], right: &[u32]) -> f64 {
    let (hl, hr) = (marginal_entropy(left), marginal_entropy(right));
    match (hl == 0.0, hr == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => {
            let info = (hl + hr - joint_entropy(left, right)).max(0.0);
            (info / (0.5 * (hl + hr))).min(1.0)
        }
    }
}

fn brute_nvi(left: &[u32], right: &[u32]) -> f64 {
    let n = left.len();
    if n <= 1 {
        return 1.0;
    }
    let vi =
        (2.0 * joint_entropy(left, right) - marginal_entropy(left) - marginal_entropy(right))
            .max(0.0);
    1.0 - vi / (n as f64).ln()
}

fn clusters(labels: &[u32]) -> Vec<BTreeSet<usize>> {
    let mut by_label: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().insert(i);
    }
    by_label.into_values().collect()
}

fn brute_f1(left: &[u32], right: &[u32]) -> f64 {
    let n = left.len() as f64;
    let directional = |from: &[BTreeSet<usize>], to: &[BTreeSet<usize>]| -> f64 {
        from.iter()
            .map(|a| {
                let best = to
                    .iter()
                    .map(|b| 2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64)
                    .fold(0.0f64, f64::max);
                (a.len() as f64 / n) * best
            })
            .sum()
    };
    let l = clusters(left);
    let r = clusters(right);
    0.5 * (directional(&l, &r) + directional(&r, &l))
}

#[test]
fn partition_enumeration_counts_match_the_bell_numbers() {
    let bell = [1usize, 1, 2, 5, 15, 52, 203];
    for (n, &expected) in bell.iter().enumerate().skip(1) {
        assert_eq!(partitions(n).len(), expected, "Bell({n})");
    }
}

#[test]
fn all_metrics_agree_with_reference_implementations_up_to_six_items() {
    let mut compared = 0usize;
    for n in 1..=6 {
        let parts = partitions(n);
        for left in &parts {
            for right in &parts {
                let m = ContingencyMatrix::from_labels(left, right).unwrap();
                let cases = [
                    ("ari", ari(&m), brute_ari(left, right)),
                    ("jaccard", pair_jaccard(&m), brute_jaccard(left, right)),
                    ("nmi", nmi(&m, NmiNormalization::Arithmetic), brute_nmi(left, right)),
                    ("nvi", nvi_similarity(&m), brute_nvi(left, right)),
                    ("f1", best_match_f1(&m), brute_f1(left, right)),
                ];
                for (name, lib, reference) in cases {
                    assert!(
                        (lib - reference).abs() <= 1e-12,
                        "{name} disagrees on {left:?} vs {right:?}: {lib} vs {reference}"
                    );
                }
                compared += 1;
            }
        }
    }
    // 1 + 4 + 25 + 225 + 2704 + 41209 ordered pairs.
    assert_eq!(compared, 44168);
}

#[test]
fn every_partition_scores_one_against_itself() {
    for n in 1..=6 {
        for part in partitions(n) {
            let m = ContingencyMatrix::from_labels(&part, &part).unwrap();
            assert!((ari(&m) - 1.0).abs() <= 1e-12, "ari on {part:?}");
            assert!((pair_jaccard(&m) - 1.0).abs() <= 1e-12, "jaccard on {part:?}");
            assert!(
                (nmi(&m, NmiNormalization::Arithmetic) - 1.0).abs() <= 1e-12,
                "nmi on {part:?}"
            );
            assert!((nmi(&m, NmiNormalization::Max) - 1.0).abs() <= 1e-12);
            assert!((nvi_similarity(&m) - 1.0).abs() <= 1e-12, "nvi on {part:?}");
            assert!((best_match_f1(&m) - 1.0).abs() <= 1e-12, "f1 on {part:?}");
        }
    }
}
