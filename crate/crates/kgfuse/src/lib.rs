//! kgfuse: zero-shot fusion of N multilingual knowledge graphs.
//!
//! The pipeline partitions each graph into head-entity-atomic triple batches,
//! pairs batches exhaustively across graphs, linearizes every pair into a
//! prompt for a pluggable alignment backend, salvage-parses the responses,
//! aggregates predictions by maximum confidence, and agglomerates the graphs
//! one at a time into a single unified multilingual graph. An evaluation
//! harness scores predicted alignments against gold pairs (precision/recall/
//! F1, Hits@k, threshold sweeps, confidence statistics).

pub mod aggregate;
pub mod backend;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod linearize;
pub mod model;
pub mod parser;
pub mod partition;
pub mod pipeline;
pub mod synth;

pub use error::KgError;
pub use model::{EntityId, GraphId, KnowledgeGraph, Label, RelationId, Triple};
