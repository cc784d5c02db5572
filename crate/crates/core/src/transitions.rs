//! Node-transition tracking across time gaps.
//!
//! A partition induces, for every timestep pair `(t, t + delta)`, a
//! labeling of the nodes active at both ends: each such node gets the
//! atomic pair (label at `t`, label at `t + delta`). Comparing these
//! pair labelings between two partitions measures whether they agree on
//! how nodes move, not just where they sit: two nodes are grouped when
//! they start together and end together.
//!
//! Pair labels are compared with the usual partition metrics, so the
//! result is invariant under renaming communities on either side; only
//! the grouping of trajectories matters.

use std::collections::BTreeMap;

use crate::error::EvalError;
use crate::metrics::{ContingencyMatrix, Metric, NmiNormalization};
use crate::model::{LabelId, NodeId, TemporalPartition};

/// One scored transition comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionScore {
    pub t: usize,
    pub delta: usize,
    /// Metric value over nodes both partitions track across the gap.
    pub score: f64,
    /// Jaccard overlap of the two tracked node sets.
    pub coverage: f64,
}

/// Aggregate of all transitions starting at `t` with gaps `1..=window`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowScore {
    pub t: usize,
    pub window: usize,
    /// Mean squared shortfall from a perfect score: `(1/w) sum (1 - s)^2`.
    pub mse: f64,
    /// Plain mean of the scores in the window.
    pub mean: f64,
}

fn pair_labels(
    partition: &TemporalPartition,
    t: usize,
    delta: usize,
) -> BTreeMap<NodeId, (LabelId, LabelId)> {
    let start = partition.assignment_at(t);
    let end = partition.assignment_at(t + delta);
    start
        .iter()
        .filter_map(|(node, &from)| end.get(node).map(|&to| (*node, (from, to))))
        .collect()
}

fn check_inputs(
    left: &TemporalPartition,
    right: &TemporalPartition,
    gap: usize,
) -> Result<usize, EvalError> {
    if left.timesteps() != right.timesteps() {
        return Err(EvalError::HorizonMismatch {
            left: left.timesteps(),
            right: right.timesteps(),
        });
    }
    if gap == 0 {
        return Err(EvalError::InvalidParameter(
            "transition gap must be at least 1".into(),
        ));
    }
    Ok(left.timesteps())
}

enum Cell {
    Scored(TransitionScore),
    /// Neither side tracks any node across this gap.
    Undefined,
}

fn score_cell(
    left: &TemporalPartition,
    right: &TemporalPartition,
    t: usize,
    delta: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<Cell, EvalError> {
    let l = pair_labels(left, t, delta);
    let r = pair_labels(right, t, delta);
    let common: Vec<NodeId> = l.keys().filter(|n| r.contains_key(n)).copied().collect();
    let union = l.len() + r.len() - common.len();
    if union == 0 {
        return Ok(Cell::Undefined);
    }
    if common.is_empty() {
        return Err(EvalError::EmptyDomain { t, delta });
    }
    let lv: Vec<(LabelId, LabelId)> = common.iter().map(|n| l[n]).collect();
    let rv: Vec<(LabelId, LabelId)> = common.iter().map(|n| r[n]).collect();
    let matrix = ContingencyMatrix::from_labels(&lv, &rv)?;
    Ok(Cell::Scored(TransitionScore {
        t,
        delta,
        score: metric.compute(&matrix, norm),
        coverage: common.len() as f64 / union as f64,
    }))
}

/// Scores the transition `(t, t + delta)` of `left` against `right`.
///
/// Errors when the cell is outside the horizon, when only one side
/// tracks nodes across the gap, or when both track nodes but none in
/// common.
pub fn score_transition(
    left: &TemporalPartition,
    right: &TemporalPartition,
    t: usize,
    delta: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<TransitionScore, EvalError> {
    let horizon = check_inputs(left, right, delta)?;
    if t + delta >= horizon {
        return Err(EvalError::WindowOutOfRange { t, delta, horizon });
    }
    match score_cell(left, right, t, delta, metric, norm)? {
        Cell::Scored(s) => Ok(s),
        Cell::Undefined => Err(EvalError::EmptyDomain { t, delta }),
    }
}

/// Scores every transition with gap `delta`, skipping cells where
/// neither side tracks any node.
pub fn transition_scores(
    left: &TemporalPartition,
    right: &TemporalPartition,
    delta: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<Vec<TransitionScore>, EvalError> {
    let horizon = check_inputs(left, right, delta)?;
    let mut out = Vec::new();
    for t in 0..horizon.saturating_sub(delta) {
        match score_cell(left, right, t, delta, metric, norm)? {
            Cell::Scored(s) => out.push(s),
            Cell::Undefined => {}
        }
    }
    Ok(out)
}

/// Aggregates the transitions starting at `t` over gaps `1..=window`.
///
/// Every gap in the window must be defined (some node tracked by either
/// side); otherwise the window is reported as an empty domain at the
/// first undefined gap.
pub fn score_window(
    left: &TemporalPartition,
    right: &TemporalPartition,
    t: usize,
    window: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<WindowScore, EvalError> {
    let horizon = check_inputs(left, right, window)?;
    if t + window >= horizon {
        return Err(EvalError::WindowOutOfRange {
            t,
            delta: window,
            horizon,
        });
    }
    let mut mse = 0.0;
    let mut mean = 0.0;
    for delta in 1..=window {
        let s = score_transition(left, right, t, delta, metric, norm)?;
        mse += (1.0 - s.score).powi(2);
        mean += s.score;
    }
    Ok(WindowScore {
        t,
        window,
        mse: mse / window as f64,
        mean: mean / window as f64,
    })
}

/// Windowed scores for every start `t` whose full window is defined.
///
/// Starts with any undefined gap in their window are skipped; a gap
/// tracked by exactly one side is still an error.
pub fn window_scores(
    left: &TemporalPartition,
    right: &TemporalPartition,
    window: usize,
    metric: Metric,
    norm: NmiNormalization,
) -> Result<Vec<WindowScore>, EvalError> {
    let horizon = check_inputs(left, right, window)?;
    let mut out = Vec::new();
    'starts: for t in 0..horizon.saturating_sub(window) {
        let mut mse = 0.0;
        let mut mean = 0.0;
        for delta in 1..=window {
            match score_cell(left, right, t, delta, metric, norm)? {
                Cell::Scored(s) => {
                    mse += (1.0 - s.score).powi(2);
                    mean += s.score;
                }
                Cell::Undefined => continue 'starts,
            }
        }
        out.push(WindowScore {
            t,
            window,
            mse: mse / window as f64,
            mean: mean / window as f64,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PartitionSource;

    fn partition(steps: &[&[(u32, &str)]]) -> TemporalPartition {
        let mut p = TemporalPartition::new(steps.len(), PartitionSource::Detected);
        for (t, assignments) in steps.iter().enumerate() {
            for &(node, name) in *assignments {
                let label = p.intern(name);
                p.assign(t, NodeId(node), label);
            }
        }
        p
    }

    #[test]
    fn identical_partitions_track_perfectly() {
        let steps: &[&[(u32, &str)]] = &[
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "y"), (2, "y"), (3, "x")],
            &[(0, "x"), (1, "y"), (2, "x"), (3, "y")],
        ];
        let p = partition(steps);
        for delta in 1..=2 {
            for s in transition_scores(&p, &p, delta, Metric::Nmi, NmiNormalization::Arithmetic)
                .unwrap()
            {
                assert_eq!(s.score, 1.0);
                assert_eq!(s.coverage, 1.0);
            }
        }
    }

    #[test]
    fn self_comparison_is_exactly_one_at_every_gap_on_generated_data() {
        // Many pair-label classes accumulate real floating point error in
        // the entropy sums; self-comparison must still cancel to exactly
        // 1.0 at every start and gap, for every metric and normalization.
        let mut config = crate::scenario::ScenarioConfig::base(0.5, 0.05);
        config.core_node_ratio = crate::sampling::DistributionSpec::constant(0.5);
        config.seed = 7;
        let p = crate::generate::generate_ground_truth(&config)
            .unwrap()
            .to_partition();
        for delta in 1..p.timesteps() {
            for norm in [NmiNormalization::Arithmetic, NmiNormalization::Max] {
                for metric in Metric::ALL {
                    for s in transition_scores(&p, &p, delta, metric, norm).unwrap() {
                        assert_eq!(
                            s.score, 1.0,
                            "{metric} at t={} delta={delta} norm={norm:?}",
                            s.t
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn community_names_do_not_matter() {
        let left = partition(&[
            &[(0, "a"), (1, "a"), (2, "b"), (3, "b")],
            &[(0, "a"), (1, "b"), (2, "b"), (3, "a")],
        ]);
        let right = partition(&[
            &[(0, "blue"), (1, "blue"), (2, "red"), (3, "red")],
            &[(0, "green"), (1, "red"), (2, "red"), (3, "green")],
        ]);
        let s =
            score_transition(&left, &right, 0, 1, Metric::Nmi, NmiNormalization::Arithmetic)
                .unwrap();
        assert_eq!(s.score, 1.0);
        assert_eq!(s.coverage, 1.0);
    }

    #[test]
    fn crossed_trajectories_lower_the_score() {
        // Both sides keep two stable groups through t=1, but the right
        // side scatters them at t=2, splitting each pair-label group of
        // the gap (0, 2) into singletons: NMI drops to 2/3.
        let left = partition(&[
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
        ]);
        let right = partition(&[
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "p"), (1, "q"), (2, "p"), (3, "q")],
        ]);
        let near = score_transition(&left, &right, 0, 1, Metric::Nmi, NmiNormalization::Arithmetic)
            .unwrap();
        assert_eq!(near.score, 1.0);
        let far = score_transition(&left, &right, 0, 2, Metric::Nmi, NmiNormalization::Arithmetic)
            .unwrap();
        assert!((far.score - 2.0 / 3.0).abs() < 1e-12, "got {}", far.score);

        let w = score_window(&left, &right, 0, 2, Metric::Nmi, NmiNormalization::Arithmetic)
            .unwrap();
        assert!((w.mean - 5.0 / 6.0).abs() < 1e-12);
        assert!((w.mse - (1.0 / 18.0)).abs() < 1e-12);
    }

    #[test]
    fn coverage_reflects_partially_tracked_nodes() {
        let left = partition(&[
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
        ]);
        let right = partition(&[
            &[(0, "x"), (1, "x"), (2, "y"), (3, "y")],
            &[(0, "x"), (1, "x"), (2, "y")],
        ]);
        let s = score_transition(&left, &right, 0, 1, Metric::Nmi, NmiNormalization::Arithmetic)
            .unwrap();
        assert_eq!(s.coverage, 0.75);
    }

    #[test]
    fn disjoint_tracked_sets_are_an_error() {
        let left = partition(&[&[(0, "x"), (1, "x")], &[(0, "x"), (1, "x")]]);
        let right = partition(&[&[(2, "y"), (3, "y")], &[(2, "y"), (3, "y")]]);
        let err =
            score_transition(&left, &right, 0, 1, Metric::Nmi, NmiNormalization::Arithmetic)
                .unwrap_err();
        assert!(matches!(err, EvalError::EmptyDomain { t: 0, delta: 1 }));
    }

    #[test]
    fn gaps_empty_on_both_sides_are_skipped_in_sweeps() {
        // t=1 has no active nodes at all, so transitions touching it are
        // undefined and the delta-1 sweep only scores (2, 3).
        let steps: &[&[(u32, &str)]] = &[
            &[(0, "x"), (1, "x")],
            &[],
            &[(0, "x"), (1, "x")],
            &[(0, "x"), (1, "y")],
        ];
        let p = partition(steps);
        let scores =
            transition_scores(&p, &p, 1, Metric::Nmi, NmiNormalization::Arithmetic).unwrap();
        assert_eq!(scores.iter().map(|s| s.t).collect::<Vec<_>>(), vec![2]);
        // With gap 2 the hop over the hole is defined, but only from t=0:
        // a start at the empty snapshot still has nothing to track.
        let hop = transition_scores(&p, &p, 2, Metric::Ari, NmiNormalization::Arithmetic).unwrap();
        assert_eq!(hop.iter().map(|s| s.t).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let p = partition(&[&[(0, "x")], &[(0, "x")]]);
        assert!(matches!(
            score_transition(&p, &p, 0, 0, Metric::Nmi, NmiNormalization::Arithmetic),
            Err(EvalError::InvalidParameter(_))
        ));
        assert!(matches!(
            score_transition(&p, &p, 1, 1, Metric::Nmi, NmiNormalization::Arithmetic),
            Err(EvalError::WindowOutOfRange { .. })
        ));
        let longer = partition(&[&[(0, "x")], &[(0, "x")], &[(0, "x")]]);
        assert!(matches!(
            score_transition(&p, &longer, 0, 1, Metric::Nmi, NmiNormalization::Arithmetic),
            Err(EvalError::HorizonMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn window_sweep_skips_starts_with_undefined_gaps() {
        let steps: &[&[(u32, &str)]] = &[
            &[(0, "x"), (1, "x")],
            &[(0, "x"), (1, "x")],
            &[],
            &[(0, "x"), (1, "x")],
        ];
        let p = partition(steps);
        let w = window_scores(&p, &p, 2, Metric::Nmi, NmiNormalization::Arithmetic).unwrap();
        // t=0 needs gaps to t=1 and t=2; the latter is undefined.
        assert!(w.is_empty());
        let single = window_scores(&p, &p, 1, Metric::Nmi, NmiNormalization::Arithmetic).unwrap();
        assert_eq!(single.iter().map(|s| s.t).collect::<Vec<_>>(), vec![0]);
        assert_eq!(single[0].mse, 0.0);
        assert_eq!(single[0].mean, 1.0);
    }
}
