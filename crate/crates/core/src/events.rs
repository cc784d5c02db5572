//! Community life-cycle events.
//!
//! Events are read off the membership overlaps between consecutive
//! snapshots, never off community labels, so the same classifier works
//! for ground truth and for detector output with arbitrary naming.
//!
//! For a community `B` at time `t`, every community `A` at `t - 1`
//! sharing members is a predecessor, linked with strength
//! `|A ∩ B| / min(|A|, |B|)`. Links at or above the threshold are strong,
//! the rest partial. The backward event of `B` is then:
//!
//! * no predecessors: `form`;
//! * two or more strong: a merge, `partial-` prefixed when partial
//!   predecessors joined too, `-and-grow` suffixed when `B` outgrew its
//!   largest strong predecessor;
//! * exactly one strong predecessor `A`: a split branch when `A` feeds
//!   two or more strong successors (`divide-and-grow` when `B` outgrew
//!   `A`), otherwise `grow`, `shrink` or `continue` by size;
//! * only partial predecessors: `partial-survive-and-grow` (the piece
//!   that survives is strictly smaller than `B` by construction, so the
//!   event always grows).
//!
//! A community whose members vanish from every community at `t + 1`
//! dissolves: the dissolve replaces its backward event at its final
//! timestep, except that a `form` is kept alongside it. Communities
//! still alive in the last snapshot are horizon-censored, not dissolved.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::model::{LabelId, TemporalPartition};

/// Default link-strength threshold separating strong from partial.
pub const DEFAULT_LINK_THRESHOLD: f64 = 0.5;

/// The twelve life-cycle event kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Form,
    Continue,
    Grow,
    Shrink,
    Merge,
    MergeAndGrow,
    PartialMerge,
    PartialMergeAndGrow,
    Split,
    DivideAndGrow,
    PartialSurviveAndGrow,
    Dissolve,
}

impl EventKind {
    pub const ALL: [EventKind; 12] = [
        EventKind::Form,
        EventKind::Continue,
        EventKind::Grow,
        EventKind::Shrink,
        EventKind::Merge,
        EventKind::MergeAndGrow,
        EventKind::PartialMerge,
        EventKind::PartialMergeAndGrow,
        EventKind::Split,
        EventKind::DivideAndGrow,
        EventKind::PartialSurviveAndGrow,
        EventKind::Dissolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Form => "form",
            EventKind::Continue => "continue",
            EventKind::Grow => "grow",
            EventKind::Shrink => "shrink",
            EventKind::Merge => "merge",
            EventKind::MergeAndGrow => "merge-and-grow",
            EventKind::PartialMerge => "partial-merge",
            EventKind::PartialMergeAndGrow => "partial-merge-and-grow",
            EventKind::Split => "split",
            EventKind::DivideAndGrow => "divide-and-grow",
            EventKind::PartialSurviveAndGrow => "partial-survive-and-grow",
            EventKind::Dissolve => "dissolve",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One classified event of one community at one timestep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityEvent {
    pub t: usize,
    pub community: String,
    pub kind: EventKind,
    /// Predecessor communities involved, strong links first; empty for
    /// `form` and `dissolve`.
    pub related: Vec<String>,
}

/// All events of a temporal partition, sorted by timestep, then
/// community, with a community's dissolve after its other events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub threshold: f64,
    pub events: Vec<CommunityEvent>,
}

impl EventLog {
    /// Events of one community, in time order.
    pub fn of_community(&self, community: &str) -> Vec<&CommunityEvent> {
        self.events
            .iter()
            .filter(|e| e.community == community)
            .collect()
    }

    pub fn counts(&self) -> BTreeMap<EventKind, usize> {
        let mut counts = BTreeMap::new();
        for event in &self.events {
            *counts.entry(event.kind).or_insert(0) += 1;
        }
        counts
    }
}

/// Total absolute difference between two logs' per-kind event counts.
pub fn event_count_diff(a: &EventLog, b: &EventLog) -> usize {
    let ca = a.counts();
    let cb = b.counts();
    EventKind::ALL
        .iter()
        .map(|kind| {
            let x = *ca.get(kind).unwrap_or(&0) as i64;
            let y = *cb.get(kind).unwrap_or(&0) as i64;
            x.abs_diff(y) as usize
        })
        .sum()
}

struct RawEvent {
    t: usize,
    label: LabelId,
    kind: EventKind,
    related: Vec<LabelId>,
}

/// Classifies the life-cycle events of every community state.
pub fn detect_events(
    partition: &TemporalPartition,
    threshold: f64,
) -> Result<EventLog, EvalError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EvalError::InvalidParameter(format!(
            "link threshold must be in (0, 1], got {threshold}"
        )));
    }
    let horizon = partition.timesteps();
    let mut raw: Vec<RawEvent> = Vec::new();
    // Index into `raw` of the backward event of each community at the
    // previous timestep, so a dissolve can replace it.
    let mut last_cells: BTreeMap<LabelId, usize> = BTreeMap::new();
    let mut prev_sizes: BTreeMap<LabelId, usize> = BTreeMap::new();

    for t in 0..horizon {
        let cur = partition.communities_at(t);
        let cur_sizes: BTreeMap<LabelId, usize> =
            cur.iter().map(|(&l, m)| (l, m.len())).collect();

        // Membership overlap of every (predecessor, current) pair.
        let mut overlap: BTreeMap<(LabelId, LabelId), usize> = BTreeMap::new();
        if t > 0 {
            let before = partition.assignment_at(t - 1);
            for (&label, members) in &cur {
                for node in members {
                    if let Some(&from) = before.get(node) {
                        *overlap.entry((from, label)).or_insert(0) += 1;
                    }
                }
            }
        }

        // Communities that existed at t-1 and left no trace at t have
        // dissolved; t-1 is never the censored final snapshot here.
        for (&label, &index) in &last_cells {
            let survived = overlap.keys().any(|&(from, _)| from == label);
            if survived {
                continue;
            }
            if raw[index].kind == EventKind::Form {
                raw.push(RawEvent {
                    t: t - 1,
                    label,
                    kind: EventKind::Dissolve,
                    related: Vec::new(),
                });
            } else {
                raw[index].kind = EventKind::Dissolve;
                raw[index].related.clear();
            }
        }

        // Strong successor fan-out per predecessor, for split detection.
        let link = |from: LabelId, to: LabelId| -> f64 {
            let shared = *overlap.get(&(from, to)).unwrap_or(&0);
            let denom = prev_sizes[&from].min(cur_sizes[&to]);
            shared as f64 / denom as f64
        };
        let mut strong_fanout: BTreeMap<LabelId, usize> = BTreeMap::new();
        for &(from, to) in overlap.keys() {
            if link(from, to) >= threshold {
                *strong_fanout.entry(from).or_insert(0) += 1;
            }
        }

        last_cells.clear();
        for (&label, members) in &cur {
            let mut strong: Vec<LabelId> = Vec::new();
            let mut partial: Vec<LabelId> = Vec::new();
            for (&(from, to), &shared) in &overlap {
                if to != label || shared == 0 {
                    continue;
                }
                if link(from, to) >= threshold {
                    strong.push(from);
                } else {
                    partial.push(from);
                }
            }

            let size = members.len();
            let (kind, related) = match strong.len() {
                0 if partial.is_empty() => (EventKind::Form, Vec::new()),
                0 => (EventKind::PartialSurviveAndGrow, partial),
                1 => {
                    let parent = strong[0];
                    let parent_size = prev_sizes[&parent];
                    let branches = strong_fanout[&parent];
                    let kind = if branches >= 2 {
                        if size > parent_size {
                            EventKind::DivideAndGrow
                        } else {
                            EventKind::Split
                        }
                    } else if size > parent_size {
                        EventKind::Grow
                    } else if size < parent_size {
                        EventKind::Shrink
                    } else {
                        EventKind::Continue
                    };
                    (kind, strong)
                }
                _ => {
                    let largest = strong.iter().map(|a| prev_sizes[a]).max().unwrap_or(0);
                    let grew = size > largest;
                    let kind = match (partial.is_empty(), grew) {
                        (true, false) => EventKind::Merge,
                        (true, true) => EventKind::MergeAndGrow,
                        (false, false) => EventKind::PartialMerge,
                        (false, true) => EventKind::PartialMergeAndGrow,
                    };
                    let mut related = strong;
                    related.extend(partial);
                    (kind, related)
                }
            };
            last_cells.insert(label, raw.len());
            raw.push(RawEvent {
                t,
                label,
                kind,
                related,
            });
        }
        prev_sizes = cur_sizes;
    }

    raw.sort_by_key(|e| (e.t, e.label, e.kind));
    let events = raw
        .into_iter()
        .map(|e| CommunityEvent {
            t: e.t,
            community: partition.label_name(e.label).to_string(),
            kind: e.kind,
            related: e
                .related
                .iter()
                .map(|&l| partition.label_name(l).to_string())
                .collect(),
        })
        .collect();
    Ok(EventLog { threshold, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, PartitionSource};

    fn partition(steps: &[&[(&str, std::ops::Range<u32>)]]) -> TemporalPartition {
        let mut p = TemporalPartition::new(steps.len(), PartitionSource::GroundTruth);
        for (t, communities) in steps.iter().enumerate() {
            for (name, nodes) in *communities {
                let label = p.intern(name);
                for n in nodes.clone() {
                    p.assign(t, NodeId(n), label);
                }
            }
        }
        p
    }

    fn kinds_of(log: &EventLog, community: &str) -> Vec<EventKind> {
        log.of_community(community).iter().map(|e| e.kind).collect()
    }

    #[test]
    fn stable_community_forms_continues_and_dissolves() {
        // Lives t=0..=3 in a horizon of 6: form, two continues, and a
        // dissolve replacing what would have been the last continue.
        let p = partition(&[
            &[("a", 0..10)],
            &[("a", 0..10)],
            &[("a", 0..10)],
            &[("a", 0..10)],
            &[],
            &[],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(
            kinds_of(&log, "a"),
            vec![
                EventKind::Form,
                EventKind::Continue,
                EventKind::Continue,
                EventKind::Dissolve
            ]
        );
        assert_eq!(log.events.last().unwrap().t, 3);
    }

    #[test]
    fn communities_alive_at_the_horizon_are_censored_not_dissolved() {
        let p = partition(&[&[("a", 0..10)], &[("a", 0..10)], &[("a", 0..10)]]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(
            kinds_of(&log, "a"),
            vec![EventKind::Form, EventKind::Continue, EventKind::Continue]
        );
    }

    #[test]
    fn single_step_community_forms_and_dissolves() {
        let p = partition(&[&[("a", 0..10)], &[], &[]]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(
            kinds_of(&log, "a"),
            vec![EventKind::Form, EventKind::Dissolve]
        );
        for event in &log.events {
            assert_eq!(event.t, 0);
        }
    }

    #[test]
    fn size_changes_with_one_strong_parent_grade_into_grow_and_shrink() {
        let p = partition(&[
            &[("a", 0..10)],
            &[("a", 0..14)],
            &[("a", 0..14)],
            &[("a", 0..9)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(
            kinds_of(&log, "a"),
            vec![
                EventKind::Form,
                EventKind::Grow,
                EventKind::Continue,
                EventKind::Shrink
            ]
        );
    }

    #[test]
    fn disjoint_strong_parents_merge_and_grow() {
        let p = partition(&[
            &[("a", 0..10), ("b", 10..20)],
            &[("c", 0..20)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::MergeAndGrow]);
        let event = &log.of_community("c")[0];
        assert_eq!(event.related, vec!["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn merging_halves_without_growth_is_a_plain_merge() {
        // c keeps five members of each parent: both links are 5/10 = 0.5,
        // strong at the default threshold, and 10 does not exceed 10.
        let p = partition(&[
            &[("a", 0..10), ("b", 10..20)],
            &[("c", 0..5), ("c", 10..15)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::Merge]);
    }

    #[test]
    fn a_partial_tributary_turns_a_merge_partial() {
        let p = partition(&[
            &[("a", 0..10), ("b", 10..20), ("d", 20..30)],
            &[("c", 0..10), ("c", 10..20), ("c", 20..22)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::PartialMergeAndGrow]);
        let event = &log.of_community("c")[0];
        assert_eq!(event.related.last().unwrap(), "d");

        // Same shape kept at the largest parent's size: no growth.
        let q = partition(&[
            &[("a", 0..10), ("b", 10..14), ("d", 20..30)],
            &[("c", 0..5), ("c", 10..13), ("c", 20..21)],
        ]);
        let log = detect_events(&q, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::PartialMerge]);
    }

    #[test]
    fn a_community_splitting_in_two_marks_both_pieces() {
        let p = partition(&[
            &[("a", 0..20)],
            &[("b", 0..10), ("c", 10..20)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(kinds_of(&log, "b"), vec![EventKind::Split]);
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::Split]);
        assert_eq!(log.of_community("b")[0].related, vec!["a".to_string()]);
    }

    #[test]
    fn a_splinter_that_outgrows_its_parent_divides_and_grows() {
        let p = partition(&[
            &[("a", 0..20)],
            &[("b", 0..10), ("c", 10..36)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        // c kept 10 of a's members: 10 / min(20, 26) = 0.5, strong; and a
        // feeds b strongly too, so both pieces branch. c outgrew a.
        assert_eq!(kinds_of(&log, "b"), vec![EventKind::Split]);
        assert_eq!(kinds_of(&log, "c"), vec![EventKind::DivideAndGrow]);
    }

    #[test]
    fn weak_survival_is_partial_survive_and_grow() {
        let p = partition(&[
            &[("a", 0..20)],
            &[("b", 0..4), ("b", 100..116)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        // b keeps 4 of a's 20: 4/20 = 0.2, below the threshold.
        assert_eq!(kinds_of(&log, "b"), vec![EventKind::PartialSurviveAndGrow]);
    }

    #[test]
    fn a_dissolving_community_leaves_no_other_event_behind() {
        // a dies after t=1 while b lives on: a's final cell becomes the
        // dissolve, so the multiset for a is exactly {form, dissolve}.
        let p = partition(&[
            &[("a", 0..10), ("b", 20..30)],
            &[("a", 0..10), ("b", 20..30)],
            &[("b", 20..30)],
            &[("b", 20..30)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(
            kinds_of(&log, "a"),
            vec![EventKind::Form, EventKind::Dissolve]
        );
        let dissolve = &log.of_community("a")[1];
        assert_eq!(dissolve.t, 1);
        assert!(dissolve.related.is_empty());
    }

    #[test]
    fn absorbed_communities_do_not_dissolve() {
        // a's members all land in c at t=1, so a merged rather than
        // dissolved even though a itself is gone.
        let p = partition(&[
            &[("a", 0..10), ("b", 10..20)],
            &[("c", 0..20)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        assert!(kinds_of(&log, "a").len() == 1);
        assert_eq!(kinds_of(&log, "a"), vec![EventKind::Form]);
        assert_eq!(log.counts()[&EventKind::MergeAndGrow], 1);
        assert!(!log.counts().contains_key(&EventKind::Dissolve));
    }

    #[test]
    fn thresholds_are_validated_and_change_classification() {
        let p = partition(&[
            &[("a", 0..10)],
            &[("b", 0..4), ("b", 100..106)],
        ]);
        assert!(detect_events(&p, 0.0).is_err());
        assert!(detect_events(&p, 1.1).is_err());
        // 4/10 links a to b: partial at 0.5, strong at 0.4.
        let strict = detect_events(&p, 0.5).unwrap();
        assert_eq!(kinds_of(&strict, "b"), vec![EventKind::PartialSurviveAndGrow]);
        let lax = detect_events(&p, 0.4).unwrap();
        assert_eq!(kinds_of(&lax, "b"), vec![EventKind::Continue]);
    }

    #[test]
    fn relabeling_preserves_event_counts() {
        let original = partition(&[
            &[("a", 0..10), ("b", 10..20)],
            &[("a", 0..10), ("b", 10..20)],
            &[("c", 0..20)],
        ]);
        let renamed = partition(&[
            &[("north", 0..10), ("south", 10..20)],
            &[("north", 0..10), ("south", 10..20)],
            &[("union", 0..20)],
        ]);
        let a = detect_events(&original, DEFAULT_LINK_THRESHOLD).unwrap();
        let b = detect_events(&renamed, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(a.counts(), b.counts());
        assert_eq!(event_count_diff(&a, &b), 0);
    }

    #[test]
    fn count_diff_sums_absolute_differences() {
        let one = partition(&[&[("a", 0..10)], &[("a", 0..10)]]);
        let two = partition(&[&[("a", 0..10), ("b", 20..30)], &[("a", 0..10)]]);
        let log_one = detect_events(&one, DEFAULT_LINK_THRESHOLD).unwrap();
        let log_two = detect_events(&two, DEFAULT_LINK_THRESHOLD).unwrap();
        assert_eq!(event_count_diff(&log_one, &log_one), 0);
        // two has one extra form and one extra dissolve.
        assert_eq!(event_count_diff(&log_one, &log_two), 2);
    }

    #[test]
    fn serialization_uses_kebab_case_names() {
        let json = serde_json::to_string(&EventKind::PartialSurviveAndGrow).unwrap();
        assert_eq!(json, "\"partial-survive-and-grow\"");
        let kind: EventKind = serde_json::from_str("\"merge-and-grow\"").unwrap();
        assert_eq!(kind, EventKind::MergeAndGrow);
        for kind in EventKind::ALL {
            assert_eq!(kind.to_string(), kind.name());
        }
    }

    #[test]
    fn events_are_sorted_and_reproducible() {
        let p = partition(&[
            &[("a", 0..10), ("b", 10..20)],
            &[("a", 0..10), ("b", 10..20)],
            &[("a", 0..10)],
        ]);
        let log = detect_events(&p, DEFAULT_LINK_THRESHOLD).unwrap();
        let mut sorted = log.events.clone();
        sorted.sort_by(|x, y| (x.t, &x.community, x.kind).cmp(&(y.t, &y.community, y.kind)));
        assert_eq!(log.events, sorted);
        assert_eq!(log.events, detect_events(&p, 0.5).unwrap().events);
    }
}
