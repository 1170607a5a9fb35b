//! Deterministic scene-language corpus pipeline.
//!
//! Turns instance-annotated 3D indoor point clouds into hierarchical scene
//! graphs and multi-granularity scene-language corpora: object captions,
//! object referrals and scene captions. Every stage is a pure function of its
//! inputs and a seed, so whole corpora are reproducible byte for byte.
//!
//! Pipeline stages, in order:
//! - [`ingest`]: load (JSON / PLY), subsample, normalize, align labels, filter
//! - [`graph`]: relation predicates, hierarchy, multi-object relations, refinement
//! - [`lang`]: templates, star references, scene prompts, rephrase clients
//! - [`caption`]: multi-view projection, occlusion scoring, caption selection
//! - [`corpus`]: JSONL records, shard merging, dataset statistics

pub mod caption;
pub mod corpus;
pub mod graph;
pub mod ingest;
pub mod lang;
pub mod scene;
pub mod seed;
pub mod synth;

pub use scene::{
    node_from_instance, validate_scene, Aabb, AlignAxis, EdgeGeom, MultiKind, MultiRelation,
    ObjectNode, PointRecord, RelationCategory, RelationEdge, RelationType, SceneGraph,
    ScenePointCloud,
};
