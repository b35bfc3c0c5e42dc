//! Max-confidence aggregation of predictions across batch pairs, plus the
//! acceptance-threshold filter.
//!
//! For every source id the target with maximal confidence across all batch
//! pairs wins; ties break by lower pair_index, then smaller target id. The
//! full ranked candidate list per source is retained for Hits@k evaluation
//! and is never touched by the threshold filter.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{EntityId, RelationId};
use crate::parser::Resolved;

/// One candidate target for a source id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate<I> {
    pub target: I,
    pub sigma: f64,
    pub pair_index: usize,
}

/// Chosen alignment plus ranked candidates, per source id of one kind.
/// Serializes as entry lists since JSON maps need string keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "I: Ord + Copy + Serialize + serde::de::DeserializeOwned",
    from = "AlignMapSerde<I>",
    into = "AlignMapSerde<I>"
)]
pub struct AlignMap<I: Ord> {
    /// Per-source winning target. Absent sources had no prediction (or were
    /// removed by the threshold filter).
    pub chosen: BTreeMap<I, Candidate<I>>,
    /// Per-source candidate multiset, ranked by (descending sigma, then
    /// lower pair_index, then smaller target id).
    pub candidates: BTreeMap<I, Vec<Candidate<I>>>,
}

impl<I: Ord + Copy> AlignMap<I> {
    pub fn chosen_pairs(&self) -> impl Iterator<Item = (I, I, f64)> + '_ {
        self.chosen.iter().map(|(s, c)| (*s, c.target, c.sigma))
    }
}

#[derive(Serialize, Deserialize)]
struct AlignMapSerde<I> {
    chosen: Vec<(I, Candidate<I>)>,
    candidates: Vec<(I, Vec<Candidate<I>>)>,
}

impl<I: Ord + Copy> From<AlignMap<I>> for AlignMapSerde<I> {
    fn from(map: AlignMap<I>) -> Self {
        Self {
            chosen: map.chosen.into_iter().collect(),
            candidates: map.candidates.into_iter().collect(),
        }
    }
}

impl<I: Ord + Copy> From<AlignMapSerde<I>> for AlignMap<I> {
    fn from(raw: AlignMapSerde<I>) -> Self {
        Self {
            chosen: raw.chosen.into_iter().collect(),
            candidates: raw.candidates.into_iter().collect(),
        }
    }
}

/// Entity and relation alignments for one fusion iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSet {
    pub entities: AlignMap<EntityId>,
    pub relations: AlignMap<RelationId>,
}

fn rank_cmp<I: Ord>(a: &Candidate<I>, b: &Candidate<I>) -> std::cmp::Ordering {
    b.sigma
        .total_cmp(&a.sigma)
        .then(a.pair_index.cmp(&b.pair_index))
        .then(a.target.cmp(&b.target))
}

/// Aggregates one kind of predictions; order-independent by construction.
pub fn aggregate_kind<I: Ord + Copy>(predictions: &[Resolved<I>]) -> AlignMap<I> {
    let mut map = AlignMap {
        chosen: BTreeMap::new(),
        candidates: BTreeMap::new(),
    };
    for p in predictions {
        map.candidates.entry(p.source).or_default().push(Candidate {
            target: p.target,
            sigma: p.sigma,
            pair_index: p.pair_index,
        });
    }
    for (source, list) in &mut map.candidates {
        list.sort_by(rank_cmp);
        map.chosen.insert(*source, list[0]);
    }
    map
}

/// Aggregates entity and relation predictions into one alignment set.
pub fn aggregate(
    entities: &[Resolved<EntityId>],
    relations: &[Resolved<RelationId>],
) -> AlignmentSet {
    AlignmentSet {
        entities: aggregate_kind(entities),
        relations: aggregate_kind(relations),
    }
}

/// Removes chosen alignments with sigma < tau. Equality keeps the alignment;
/// ranked candidate lists stay intact for evaluation.
pub fn filter_threshold(set: &AlignmentSet, tau: f64) -> AlignmentSet {
    AlignmentSet {
        entities: filter_kind(&set.entities, tau),
        relations: filter_kind(&set.relations, tau),
    }
}

fn filter_kind<I: Ord + Copy>(map: &AlignMap<I>, tau: f64) -> AlignMap<I> {
    AlignMap {
        chosen: map
            .chosen
            .iter()
            .filter(|(_, c)| c.sigma >= tau)
            .map(|(s, c)| (*s, *c))
            .collect(),
        candidates: map.candidates.clone(),
    }
}

/// Optional greedy bijective post-pass (off by default in the pipeline):
/// walks chosen alignments in descending-confidence order and skips any whose
/// target was already taken.
pub fn enforce_bijective<I: Ord + Copy>(map: &AlignMap<I>) -> AlignMap<I> {
    let mut entries: Vec<(I, Candidate<I>)> =
        map.chosen.iter().map(|(s, c)| (*s, *c)).collect();
    entries.sort_by(|a, b| rank_cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));
    let mut used = std::collections::BTreeSet::new();
    let mut chosen = BTreeMap::new();
    for (source, cand) in entries {
        if used.insert(cand.target) {
            chosen.insert(source, cand);
        }
    }
    AlignMap {
        chosen,
        candidates: map.candidates.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GraphId;

    fn e(local: u32) -> EntityId {
        EntityId::new(GraphId(0), local)
    }

    fn t(local: u32) -> EntityId {
        EntityId::new(GraphId(1), local)
    }

    fn pred(source: u32, target: u32, sigma: f64, pair_index: usize) -> Resolved<EntityId> {
        Resolved {
            source: e(source),
            target: t(target),
            sigma,
            pair_index,
        }
    }

    #[test]
    fn single_prediction_is_chosen() {
        let map = aggregate_kind(&[pred(1, 10, 0.7, 0)]);
        assert_eq!(map.chosen[&e(1)].target, t(10));
        assert_eq!(map.chosen[&e(1)].sigma, 0.7);
    }

    #[test]
    fn argmax_over_multiset() {
        let preds = [pred(1, 10, 0.7, 0), pred(1, 11, 0.9, 1), pred(1, 10, 0.8, 2)];
        let map = aggregate_kind(&preds);
        assert_eq!(map.chosen[&e(1)].target, t(11));
        assert_eq!(map.candidates[&e(1)].len(), 3);
    }

    #[test]
    fn equal_sigma_breaks_by_lower_pair_index() {
        let preds = [pred(1, 10, 0.9, 5), pred(1, 11, 0.9, 2)];
        let map = aggregate_kind(&preds);
        assert_eq!(map.chosen[&e(1)].target, t(11));
    }

    #[test]
    fn equal_sigma_and_pair_breaks_by_smaller_target() {
        let preds = [pred(1, 12, 0.9, 2), pred(1, 11, 0.9, 2)];
        let map = aggregate_kind(&preds);
        assert_eq!(map.chosen[&e(1)].target, t(11));
    }

    #[test]
    fn order_independence() {
        let mut preds = vec![
            pred(1, 10, 0.7, 0),
            pred(1, 11, 0.9, 1),
            pred(2, 10, 0.5, 3),
            pred(2, 13, 0.5, 1),
        ];
        let forward = aggregate_kind(&preds);
        preds.reverse();
        assert_eq!(aggregate_kind(&preds), forward);
    }

    #[test]
    fn threshold_strict_less_removed_equality_kept() {
        let preds = [pred(1, 10, 0.89, 0), pred(2, 11, 0.90, 0)];
        let set = aggregate(&preds, &[]);
        let filtered = filter_threshold(&set, 0.90);
        assert!(!filtered.entities.chosen.contains_key(&e(1)));
        assert!(filtered.entities.chosen.contains_key(&e(2)));
        // Candidates untouched.
        assert_eq!(filtered.entities.candidates.len(), 2);
        // tau = 0 keeps everything.
        assert_eq!(filter_threshold(&set, 0.0).entities.chosen.len(), 2);
    }

    #[test]
    fn bijective_mode_skips_used_targets() {
        let preds = [pred(1, 10, 0.9, 0), pred(2, 10, 0.8, 0), pred(3, 11, 0.7, 0)];
        let map = aggregate_kind(&preds);
        let bij = enforce_bijective(&map);
        assert_eq!(bij.chosen.len(), 2);
        assert_eq!(bij.chosen[&e(1)].target, t(10));
        assert!(!bij.chosen.contains_key(&e(2)));
        assert_eq!(bij.chosen[&e(3)].target, t(11));
    }
}
