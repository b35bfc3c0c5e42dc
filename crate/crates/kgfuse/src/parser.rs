//! Salvage parsing of backend output and label-to-id resolution.
//!
//! Model output is frequently wrapped in markdown fences, prefixed with
//! prose, or truncated mid-item by token limits. `salvage_parse` recovers the
//! longest prefix of complete alignment items by structural scanning (depth
//! tracking with string-literal awareness, not regex): it cuts the payload at
//! the last completed container and closes whatever was still open. It never
//! fabricates fields; partial trailing elements are dropped and counted.

use std::collections::BTreeSet;

use serde_json::Value;

use crate::model::{EntityId, LabelIndex, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignKind {
    Entity,
    Relation,
}

/// One alignment item as emitted by the backend, before id resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedItem {
    pub kind: AlignKind,
    pub source_label: String,
    pub target_label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SalvageDiagnostics {
    /// A markdown code fence was stripped.
    pub fence_stripped: bool,
    /// The payload was structurally incomplete and had to be repaired.
    pub truncated: bool,
    /// Trailing partial fragments discarded by the repair cut.
    pub dropped_fragments: usize,
    /// Complete elements skipped for missing or ill-typed fields.
    pub skipped_items: usize,
    /// No JSON-like payload was found at all.
    pub no_payload: bool,
}

/// Extracts alignment items from arbitrary backend text.
///
/// Returns exactly the items that are structurally complete in the input, in
/// payload order (entity items first, then relation items). Confidence is
/// clipped into [0, 1].
pub fn salvage_parse(raw: &str) -> (Vec<ParsedItem>, SalvageDiagnostics) {
    let mut diag = SalvageDiagnostics::default();

    let content = match strip_fences(raw) {
        Some(inner) => {
            diag.fence_stripped = true;
            inner
        }
        None => raw,
    };

    let Some(start) = content.find(['{', '[']) else {
        diag.no_payload = true;
        return (Vec::new(), diag);
    };
    let body = &content[start..];

    let payload = match scan_payload(body) {
        Scan::Complete(end) => body[..end].to_string(),
        Scan::Repairable {
            cut,
            open_stack,
            fragment_after,
        } => {
            diag.truncated = true;
            diag.dropped_fragments = usize::from(fragment_after);
            let mut repaired = body[..cut].to_string();
            for c in open_stack.iter().rev() {
                repaired.push(match c {
                    b'{' => '}',
                    _ => ']',
                });
            }
            repaired
        }
        Scan::Hopeless => {
            diag.no_payload = true;
            return (Vec::new(), diag);
        }
    };

    let value: Value = match serde_json::from_str(&payload) {
        Ok(v) => v,
        Err(_) => {
            diag.no_payload = true;
            return (Vec::new(), diag);
        }
    };

    let mut items = Vec::new();
    for (key, kind) in [
        ("entity_alignments", AlignKind::Entity),
        ("relation_alignments", AlignKind::Relation),
    ] {
        let Some(array) = value.get(key).and_then(Value::as_array) else {
            continue;
        };
        for element in array {
            match extract_item(element, kind) {
                Some(item) => items.push(item),
                None => diag.skipped_items += 1,
            }
        }
    }
    (items, diag)
}

fn extract_item(element: &Value, kind: AlignKind) -> Option<ParsedItem> {
    let obj = element.as_object()?;
    let source_label = obj.get("source_label")?.as_str()?.to_string();
    let target_label = obj.get("target_label")?.as_str()?.to_string();
    if source_label.trim().is_empty() || target_label.trim().is_empty() {
        return None;
    }
    let confidence = match obj.get("confidence")? {
        Value::Number(n) => n.as_f64()?,
        Value::String(s) => s.trim().parse::<f64>().ok()?,
        _ => return None,
    };
    if confidence.is_nan() {
        return None;
    }
    Some(ParsedItem {
        kind,
        source_label,
        target_label,
        confidence: confidence.clamp(0.0, 1.0),
    })
}

/// Returns the inside of the first markdown code fence, if any.
fn strip_fences(raw: &str) -> Option<&str> {
    let open = raw.find("```")?;
    let after_marker = &raw[open + 3..];
    // Skip an optional language tag up to end of line.
    let body_start = after_marker.find('\n').map(|i| i + 1).unwrap_or(0);
    let body = &after_marker[body_start..];
    match body.find("```") {
        Some(close) => Some(&body[..close]),
        None => Some(body),
    }
}

enum Scan {
    /// Payload is balanced; byte length of the balanced prefix.
    Complete(usize),
    Repairable {
        /// Cut position (byte offset) right after the last completed container.
        cut: usize,
        /// Containers still open at the cut, outermost first.
        open_stack: Vec<u8>,
        /// Non-whitespace content existed after the cut.
        fragment_after: bool,
    },
    Hopeless,
}

/// Structural scan of a candidate JSON payload starting at a `{` or `[`.
fn scan_payload(body: &str) -> Scan {
    let mut stack: Vec<u8> = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    // Safe cut point: right after a `}` or `]` that leaves the stack
    // non-empty. Cutting there and closing the snapshot stack yields valid
    // JSON with every retained element fully present in the input.
    let mut cut: Option<(usize, Vec<u8>)> = None;

    for (i, ch) in body.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            continue;
        }
        match ch {
            '"' => in_string = true,
            '{' | '[' => stack.push(ch as u8),
            '}' | ']' => {
                let expected = if ch == '}' { b'{' } else { b'[' };
                if stack.last() != Some(&expected) {
                    // Mismatched closer: stop, salvage what we had.
                    break;
                }
                stack.pop();
                let after = i + ch.len_utf8();
                if stack.is_empty() {
                    return Scan::Complete(after);
                }
                cut = Some((after, stack.clone()));
            }
            _ => {}
        }
    }

    match cut {
        Some((cut, open_stack)) => {
            let fragment_after = !body[cut..].trim().is_empty();
            Scan::Repairable {
                cut,
                open_stack,
                fragment_after,
            }
        }
        None => Scan::Hopeless,
    }
}

/// An alignment prediction with both labels resolved to ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved<I> {
    pub source: I,
    pub target: I,
    pub sigma: f64,
    pub pair_index: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResolveStats {
    /// Items whose source or target label resolved to no id.
    pub dropped: usize,
    /// Label occurrences that resolved to more than one id (smallest id wins).
    pub ambiguous: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ResolvedBatch {
    pub entities: Vec<Resolved<EntityId>>,
    pub relations: Vec<Resolved<RelationId>>,
    pub stats: ResolveStats,
}

/// Resolves parsed items against the source and target label indexes.
/// Unresolvable items are dropped (counted, not errors); ambiguous labels
/// resolve to the smallest id.
pub fn resolve(
    items: &[ParsedItem],
    source_index: &LabelIndex,
    target_index: &LabelIndex,
    pair_index: usize,
) -> ResolvedBatch {
    let mut batch = ResolvedBatch::default();
    for item in items {
        match item.kind {
            AlignKind::Entity => {
                let src = source_index.lookup_entity(&item.source_label);
                let tgt = target_index.lookup_entity(&item.target_label);
                match pick(&src, &tgt, &mut batch.stats) {
                    Some((source, target)) => batch.entities.push(Resolved {
                        source,
                        target,
                        sigma: item.confidence,
                        pair_index,
                    }),
                    None => batch.stats.dropped += 1,
                }
            }
            AlignKind::Relation => {
                let src = source_index.lookup_relation(&item.source_label);
                let tgt = target_index.lookup_relation(&item.target_label);
                match pick(&src, &tgt, &mut batch.stats) {
                    Some((source, target)) => batch.relations.push(Resolved {
                        source,
                        target,
                        sigma: item.confidence,
                        pair_index,
                    }),
                    None => batch.stats.dropped += 1,
                }
            }
        }
    }
    batch
}

fn pick<I: Copy + Ord>(
    src: &BTreeSet<I>,
    tgt: &BTreeSet<I>,
    stats: &mut ResolveStats,
) -> Option<(I, I)> {
    let (s, t) = match (src.first(), tgt.first()) {
        (Some(s), Some(t)) => (*s, *t),
        _ => return None,
    };
    if src.len() > 1 {
        stats.ambiguous += 1;
    }
    if tgt.len() > 1 {
        stats.ambiguous += 1;
    }
    Some((s, t))
}
