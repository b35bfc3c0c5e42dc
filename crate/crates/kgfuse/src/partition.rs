//! Entity-centric partitioning of a graph's triples into context-budget
//! batches, and exhaustive Cartesian pairing of batch sets.
//!
//! All triples sharing a head entity stay in one batch (head-atomicity), so
//! an entity's outgoing neighborhood is always visible to the backend as a
//! whole. Head groups are packed first-fit in (descending group size, then
//! entity id) order; a single group larger than the budget gets a dedicated
//! batch and is flagged oversized instead of being split.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::linearize::linearize_triple;
use crate::model::{EntityId, GraphId, KnowledgeGraph, Triple};

#[derive(Debug, Clone, Copy)]
pub struct PartitionConfig {
    /// Budget in linearized characters (newline included per line). A rough
    /// guide for sizing against token windows: ~4 characters per token for
    /// Latin-script labels, fewer for CJK.
    pub char_budget: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { char_budget: 4000 }
    }
}

/// A head-entity-atomic group of triples.
#[derive(Debug, Clone)]
pub struct Batch {
    pub batch_id: usize,
    pub graph: GraphId,
    pub triples: Vec<Triple>,
    pub head_entities: BTreeSet<EntityId>,
    pub linearized_size: usize,
    pub oversized: bool,
}

/// One Cartesian pairing of a source batch with a target batch, referenced by
/// position into the two batch lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPair {
    pub source: usize,
    pub target: usize,
    pub pair_index: usize,
}

/// Splits a graph's triples into batches under the character budget.
///
/// Deterministic: identical (graph, config) input yields an identical batch
/// list, byte-for-byte after linearization.
pub fn partition(graph: &KnowledgeGraph, config: &PartitionConfig) -> Result<Vec<Batch>> {
    // Group triples by head; BTreeMap iteration fixes the within-group order.
    let mut groups: BTreeMap<EntityId, Vec<Triple>> = BTreeMap::new();
    for t in &graph.triples {
        groups.entry(t.head).or_default().push(*t);
    }

    struct Group {
        head: EntityId,
        triples: Vec<Triple>,
        size: usize,
    }
    let mut sized = Vec::with_capacity(groups.len());
    for (head, triples) in groups {
        let mut size = 0;
        for t in &triples {
            size += linearize_triple(t, graph)?.chars().count() + 1;
        }
        sized.push(Group {
            head,
            triples,
            size,
        });
    }
    sized.sort_by(|a, b| b.size.cmp(&a.size).then(a.head.cmp(&b.head)));

    let mut batches: Vec<Batch> = Vec::new();
    for group in sized {
        if group.size > config.char_budget {
            batches.push(Batch {
                batch_id: 0,
                graph: graph.id,
                triples: group.triples,
                head_entities: [group.head].into_iter().collect(),
                linearized_size: group.size,
                oversized: true,
            });
            continue;
        }
        let slot = batches
            .iter_mut()
            .find(|b| !b.oversized && b.linearized_size + group.size <= config.char_budget);
        match slot {
            Some(b) => {
                b.triples.extend(group.triples);
                b.head_entities.insert(group.head);
                b.linearized_size += group.size;
            }
            None => batches.push(Batch {
                batch_id: 0,
                graph: graph.id,
                triples: group.triples,
                head_entities: [group.head].into_iter().collect(),
                linearized_size: group.size,
                oversized: false,
            }),
        }
    }
    for (i, b) in batches.iter_mut().enumerate() {
        b.batch_id = i;
    }
    Ok(batches)
}

/// Cartesian product of the two batch lists, pair_index in row-major
/// (source-major) order.
pub fn pair_batches(source: &[Batch], target: &[Batch]) -> Vec<BatchPair> {
    let mut pairs = Vec::with_capacity(source.len() * target.len());
    let mut pair_index = 0;
    for s in 0..source.len() {
        for t in 0..target.len() {
            pairs.push(BatchPair {
                source: s,
                target: t,
                pair_index,
            });
            pair_index += 1;
        }
    }
    pairs
}
