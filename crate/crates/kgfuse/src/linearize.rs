//! Triple-to-text linearization and prompt assembly.
//!
//! A triple renders as the single line "head_label relation_label tail_label"
//! using each id's primary label. A batch renders as one line per triple in
//! stored order. Prompts are built from two editable text templates: the
//! system template takes `{tau}`, the user template takes `{source_block}`
//! and `{target_block}`.

use crate::error::{KgError, Result};
use crate::model::KnowledgeGraph;
use crate::partition::Batch;
use crate::Triple;

pub const DEFAULT_SYSTEM_TEMPLATE: &str = include_str!("../assets/system_prompt.txt");
pub const DEFAULT_USER_TEMPLATE: &str = include_str!("../assets/user_prompt.txt");

/// Header lines of the default user template. The oracle backend locates the
/// source and target blocks by these markers.
pub const SOURCE_HEADER: &str = "SOURCE GRAPH TRIPLES:";
pub const TARGET_HEADER: &str = "TARGET GRAPH TRIPLES:";

/// The two-part prompt sent to an alignment backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
    pub pair_index: usize,
}

/// Prompt templates, overridable from files.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub system: String,
    pub user: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            system: DEFAULT_SYSTEM_TEMPLATE.to_string(),
            user: DEFAULT_USER_TEMPLATE.to_string(),
        }
    }
}

impl PromptTemplates {
    pub fn from_files(system: &std::path::Path, user: &std::path::Path) -> Result<Self> {
        let read = |p: &std::path::Path| {
            std::fs::read_to_string(p).map_err(|e| KgError::Io {
                path: p.to_path_buf(),
                source: e,
            })
        };
        Ok(Self {
            system: read(system)?,
            user: read(user)?,
        })
    }
}

/// Renders one triple using primary labels. Ids must resolve in `graph`.
pub fn linearize_triple(triple: &Triple, graph: &KnowledgeGraph) -> Result<String> {
    let head = primary_entity_label(graph, triple, triple.head.local, "head")?;
    let tail = primary_entity_label(graph, triple, triple.tail.local, "tail")?;
    let rel = graph
        .relation_labels(triple.relation)
        .and_then(|ls| ls.primary())
        .ok_or_else(|| {
            KgError::Validation(format!(
                "cannot linearize: unresolvable relation id {}",
                triple.relation.local
            ))
        })?;
    Ok(format!("{} {} {}", head, rel.text, tail))
}

fn primary_entity_label<'g>(
    graph: &'g KnowledgeGraph,
    triple: &Triple,
    local: u32,
    role: &str,
) -> Result<&'g str> {
    let id = if role == "head" { triple.head } else { triple.tail };
    graph
        .entity_labels(id)
        .and_then(|ls| ls.primary())
        .map(|l| l.text.as_str())
        .ok_or_else(|| {
            KgError::Validation(format!("cannot linearize: unresolvable {role} entity id {local}"))
        })
}

/// Renders a batch as one line per triple, in batch order.
pub fn linearize_batch(batch: &Batch, graph: &KnowledgeGraph) -> Result<String> {
    let mut lines = Vec::with_capacity(batch.triples.len());
    for t in &batch.triples {
        lines.push(linearize_triple(t, graph)?);
    }
    Ok(lines.join("\n"))
}

/// Assembles the system + user prompt for one batch pair.
pub fn build_prompt(
    source_batch: &Batch,
    source_graph: &KnowledgeGraph,
    target_batch: &Batch,
    target_graph: &KnowledgeGraph,
    templates: &PromptTemplates,
    tau: f64,
    pair_index: usize,
) -> Result<Prompt> {
    let source_block = linearize_batch(source_batch, source_graph)?;
    let target_block = linearize_batch(target_batch, target_graph)?;
    let system = templates.system.replace("{tau}", &format!("{tau:.2}"));
    let user = templates
        .user
        .replace("{source_block}", &source_block)
        .replace("{target_block}", &target_block);
    Ok(Prompt {
        system,
        user,
        pair_index,
    })
}
