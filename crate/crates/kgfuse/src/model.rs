//! Core graph data model: identifiers, labels, triples, graphs and the
//! case-insensitive label index used to resolve backend output back to ids.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};

/// Identifier of one input graph. Assigned by load order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct GraphId(pub u32);

/// Entity identifier, globally unique as a (graph, local) pair.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct EntityId {
    pub graph: GraphId,
    pub local: u32,
}

impl EntityId {
    pub fn new(graph: GraphId, local: u32) -> Self {
        Self { graph, local }
    }
}

/// Relation identifier, globally unique as a (graph, local) pair.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct RelationId {
    pub graph: GraphId,
    pub local: u32,
}

impl RelationId {
    pub fn new(graph: GraphId, local: u32) -> Self {
        Self { graph, local }
    }
}

/// A language-tagged surface form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub text: String,
    pub lang: String,
}

impl Label {
    pub fn new(text: impl Into<String>, lang: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            lang: lang.into(),
        }
    }
}

/// Ordered label set. The first stored label is the primary label used by the
/// linearizer; later labels (e.g. inherited during fusion) are kept in
/// insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelSet(Vec<Label>);

impl LabelSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn single(label: Label) -> Self {
        Self(vec![label])
    }

    pub fn insert(&mut self, label: Label) {
        if !self.0.contains(&label) {
            self.0.push(label);
        }
    }

    pub fn extend_from(&mut self, other: &LabelSet) {
        for l in &other.0 {
            self.insert(l.clone());
        }
    }

    pub fn primary(&self) -> Option<&Label> {
        self.0.first()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Label> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A directed labeled edge (h, r, t).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// One language-tagged graph G = (E, R, T). Also used as the core of the
/// unified graph, where entity ids from several source graphs coexist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    pub id: GraphId,
    pub lang: String,
    pub entities: BTreeMap<EntityId, LabelSet>,
    pub relations: BTreeMap<RelationId, LabelSet>,
    pub triples: BTreeSet<Triple>,
}

impl KnowledgeGraph {
    pub fn entity_labels(&self, id: EntityId) -> Option<&LabelSet> {
        self.entities.get(&id)
    }

    pub fn relation_labels(&self, id: RelationId) -> Option<&LabelSet> {
        self.relations.get(&id)
    }

    /// Checks that every triple references existing ids and every entity and
    /// relation carries at least one label.
    pub fn validate(&self) -> Result<()> {
        for (id, labels) in &self.entities {
            if labels.is_empty() {
                return Err(KgError::Validation(format!(
                    "entity {:?}/{} has no labels",
                    id.graph, id.local
                )));
            }
        }
        for (id, labels) in &self.relations {
            if labels.is_empty() {
                return Err(KgError::Validation(format!(
                    "relation {:?}/{} has no labels",
                    id.graph, id.local
                )));
            }
        }
        for t in &self.triples {
            if !self.entities.contains_key(&t.head) {
                return Err(KgError::Validation(format!(
                    "triple ({},{},{}) references unknown head entity",
                    t.head.local, t.relation.local, t.tail.local
                )));
            }
            if !self.entities.contains_key(&t.tail) {
                return Err(KgError::Validation(format!(
                    "triple ({},{},{}) references unknown tail entity",
                    t.head.local, t.relation.local, t.tail.local
                )));
            }
            if !self.relations.contains_key(&t.relation) {
                return Err(KgError::Validation(format!(
                    "triple ({},{},{}) references unknown relation",
                    t.head.local, t.relation.local, t.tail.local
                )));
            }
        }
        Ok(())
    }
}

/// Builds a validated graph. Duplicate triples collapse to one (set
/// semantics); dangling id references and label-less entities are rejected.
pub fn build_graph(
    id: GraphId,
    lang: impl Into<String>,
    entities: BTreeMap<EntityId, LabelSet>,
    relations: BTreeMap<RelationId, LabelSet>,
    triples: impl IntoIterator<Item = Triple>,
) -> Result<KnowledgeGraph> {
    let graph = KnowledgeGraph {
        id,
        lang: lang.into(),
        entities,
        relations,
        triples: triples.into_iter().collect(),
    };
    graph.validate()?;
    Ok(graph)
}

/// Label normalization applied on both sides of every lookup: underscores
/// become spaces, text is casefolded and trimmed, and internal whitespace
/// runs collapse to a single space. DBpedia URIs use underscores where model
/// output uses spaces, so the two must compare equal.
pub fn normalize_label(s: &str) -> String {
    let replaced = s.replace('_', " ");
    let lowered = replaced.to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-insensitive lookup from normalized label text to the ids that carry
/// it. Ambiguous labels map to multi-id sets; resolution tie-breaks live in
/// the response parser.
#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    entities: HashMap<String, BTreeSet<EntityId>>,
    relations: HashMap<String, BTreeSet<RelationId>>,
}

impl LabelIndex {
    pub fn build(graph: &KnowledgeGraph) -> Self {
        let mut index = LabelIndex::default();
        for (id, labels) in &graph.entities {
            for label in labels.iter() {
                index
                    .entities
                    .entry(normalize_label(&label.text))
                    .or_default()
                    .insert(*id);
            }
        }
        for (id, labels) in &graph.relations {
            for label in labels.iter() {
                index
                    .relations
                    .entry(normalize_label(&label.text))
                    .or_default()
                    .insert(*id);
            }
        }
        index
    }

    pub fn lookup_entity(&self, label: &str) -> BTreeSet<EntityId> {
        self.entities
            .get(&normalize_label(label))
            .cloned()
            .unwrap_or_default()
    }

    pub fn lookup_relation(&self, label: &str) -> BTreeSet<RelationId> {
        self.relations
            .get(&normalize_label(label))
            .cloned()
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GraphId {
        GraphId(0)
    }

    fn toy_tables() -> (BTreeMap<EntityId, LabelSet>, BTreeMap<RelationId, LabelSet>) {
        let mut entities = BTreeMap::new();
        entities.insert(
            EntityId::new(g(), 0),
            LabelSet::single(Label::new("Paris", "en")),
        );
        entities.insert(
            EntityId::new(g(), 1),
            LabelSet::single(Label::new("France", "en")),
        );
        let mut relations = BTreeMap::new();
        relations.insert(
            RelationId::new(g(), 0),
            LabelSet::single(Label::new("capital_of", "en")),
        );
        (entities, relations)
    }

    #[test]
    fn minimal_graph_builds() {
        let (e, r) = toy_tables();
        let t = Triple::new(EntityId::new(g(), 0), RelationId::new(g(), 0), EntityId::new(g(), 1));
        let graph = build_graph(g(), "en", e, r, [t]).unwrap();
        assert_eq!(graph.triples.len(), 1);
    }

    #[test]
    fn duplicate_triples_collapse() {
        let (e, r) = toy_tables();
        let t = Triple::new(EntityId::new(g(), 0), RelationId::new(g(), 0), EntityId::new(g(), 1));
        let graph = build_graph(g(), "en", e, r, [t, t]).unwrap();
        assert_eq!(graph.triples.len(), 1);
    }

    #[test]
    fn dangling_reference_rejected() {
        let (e, r) = toy_tables();
        let t = Triple::new(EntityId::new(g(), 0), RelationId::new(g(), 0), EntityId::new(g(), 99));
        assert!(build_graph(g(), "en", e, r, [t]).is_err());
    }

    #[test]
    fn entity_without_label_rejected() {
        let (mut e, r) = toy_tables();
        e.insert(EntityId::new(g(), 2), LabelSet::new());
        assert!(build_graph(g(), "en", e, r, []).is_err());
    }

    #[test]
    fn index_casefold_lookup() {
        let (e, r) = toy_tables();
        let graph = build_graph(g(), "en", e, r, []).unwrap();
        let index = LabelIndex::build(&graph);
        assert_eq!(
            index.lookup_entity("paris"),
            [EntityId::new(g(), 0)].into_iter().collect()
        );
        assert_eq!(index.lookup_relation("capital of").len(), 1);
        assert!(index.lookup_entity("absent label").is_empty());
    }

    #[test]
    fn ambiguous_labels_map_to_sets() {
        let mut entities = BTreeMap::new();
        entities.insert(
            EntityId::new(g(), 3),
            LabelSet::single(Label::new("Mercury", "en")),
        );
        entities.insert(
            EntityId::new(g(), 9),
            LabelSet::single(Label::new("Mercury", "en")),
        );
        let graph = build_graph(g(), "en", entities, BTreeMap::new(), []).unwrap();
        let index = LabelIndex::build(&graph);
        let ids = index.lookup_entity("mercury");
        assert_eq!(ids.len(), 2);
        assert!(ids.contains(&EntityId::new(g(), 3)) && ids.contains(&EntityId::new(g(), 9)));
    }

    #[test]
    fn normalization_is_idempotent() {
        for s in ["  Foo_Bar  baz ", "Tokyo  Tower", "_a__b_", "ÉCOLE", ""] {
            let once = normalize_label(s);
            assert_eq!(normalize_label(&once), once);
        }
    }
}
