//! Scene graph construction: relation predicates, hierarchy assignment,
//! multi-object relations and the automatic verification/refinement pass.

mod io;
mod levels;
mod multi;
mod predicates;
mod refine;

pub use io::{graph_from_json_str, graph_to_json_string};
pub use levels::assign_levels;
pub use multi::{aligned_relations, between_relations};
pub use predicates::{
    horizontal, in_contact_score, mirror_relation, sector, vertical_geom, vertical_in_contact,
    vertical_non_contact,
};
pub use refine::{RefinementMap, RefinementRule};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{
    node_from_instance, Aabb, ObjectNode, RelationCategory, RelationEdge, RelationType, SceneError,
    SceneGraph, ScenePointCloud,
};
use crate::seed::hex_digest;

/// Geometric thresholds for the relation predicates.
///
/// The paper's taxonomy names the relations; the numbers here are tuned to
/// human indoor scale and fully configurable. The digest of the config is
/// embedded in every output graph for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub eps_contact_m: f64,
    pub footprint_overlap_min: f64,
    pub containment_inside: f64,
    pub containment_embedded: f64,
    pub container_labels: BTreeSet<String>,
    pub wall_labels: BTreeSet<String>,
    pub floor_labels: BTreeSet<String>,
    pub hang_gap_m: f64,
    pub above_overlap_min: f64,
    pub higher_min_dz_m: f64,
    pub higher_max_xy_m: f64,
    pub near_max_m: f64,
    pub close_max_m: f64,
    pub adjacent_gap_m: f64,
    pub aligned_delta_floor_m: f64,
    pub aligned_delta_scale: f64,
    /// Alternative hangable rule: require no in-contact relation in either
    /// direction instead of just no in-contact parent.
    pub hangable_requires_no_contact_either_way: bool,
    pub seed: u64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            eps_contact_m: 0.05,
            footprint_overlap_min: 0.3,
            containment_inside: 0.95,
            containment_embedded: 0.5,
            container_labels: ["basket", "box", "cabinet", "drawer", "shelf", "wardrobe"]
                .into_iter()
                .map(String::from)
                .collect(),
            wall_labels: BTreeSet::from(["wall".to_string()]),
            floor_labels: BTreeSet::from(["floor".to_string()]),
            hang_gap_m: 0.10,
            above_overlap_min: 0.2,
            higher_min_dz_m: 0.3,
            higher_max_xy_m: 2.0,
            near_max_m: 1.5,
            close_max_m: 0.5,
            adjacent_gap_m: 0.2,
            aligned_delta_floor_m: 0.10,
            aligned_delta_scale: 0.02,
            hangable_requires_no_contact_either_way: false,
            seed: 0,
        }
    }
}

impl GraphConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        let thresholds = [
            ("eps_contact_m", self.eps_contact_m),
            ("footprint_overlap_min", self.footprint_overlap_min),
            ("containment_inside", self.containment_inside),
            ("containment_embedded", self.containment_embedded),
            ("hang_gap_m", self.hang_gap_m),
            ("above_overlap_min", self.above_overlap_min),
            ("higher_min_dz_m", self.higher_min_dz_m),
            ("higher_max_xy_m", self.higher_max_xy_m),
            ("near_max_m", self.near_max_m),
            ("close_max_m", self.close_max_m),
            ("adjacent_gap_m", self.adjacent_gap_m),
            ("aligned_delta_floor_m", self.aligned_delta_floor_m),
            ("aligned_delta_scale", self.aligned_delta_scale),
        ];
        for (name, value) in thresholds {
            if !(value > 0.0) {
                return Err(GraphError::InvalidConfig(format!("{name} must be > 0, got {value}")));
            }
        }
        if self.containment_inside <= self.containment_embedded {
            return Err(GraphError::InvalidConfig(format!(
                "containment_inside ({}) must exceed containment_embedded ({})",
                self.containment_inside, self.containment_embedded
            )));
        }
        Ok(())
    }

    /// Digest of the canonicalized JSON form, for provenance.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serialization cannot fail");
        hex_digest(&["graph-config", &canonical], 16)
    }

    /// Copy with every absolute length threshold multiplied by `s`; the
    /// dimensionless ratios stay put. Scaling a scene by `s` together with
    /// `scaled(s)` thresholds preserves the relation multiset.
    pub fn scaled(&self, s: f64) -> GraphConfig {
        GraphConfig {
            eps_contact_m: self.eps_contact_m * s,
            hang_gap_m: self.hang_gap_m * s,
            higher_min_dz_m: self.higher_min_dz_m * s,
            higher_max_xy_m: self.higher_max_xy_m * s,
            near_max_m: self.near_max_m * s,
            close_max_m: self.close_max_m * s,
            adjacent_gap_m: self.adjacent_gap_m * s,
            aligned_delta_floor_m: self.aligned_delta_floor_m * s,
            ..self.clone()
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no floor: no node labeled with any of the configured floor labels")]
    NoFloor,
    #[error("cycle in in-contact support edges: {0:?}")]
    SupportCycle(Vec<u32>),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("refinement rule maps {from} to {to}, which crosses relation categories")]
    CrossCategoryRefinement { from: RelationType, to: RelationType },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("graph parse error: {0}")]
    Parse(String),
}

/// Precedence used to pick a hangable node's primary non-contact anchor.
fn non_contact_rank(rel: RelationType) -> u8 {
    match rel {
        RelationType::HangingOn => 0,
        RelationType::Above => 1,
        RelationType::Below => 2,
        RelationType::HigherThan => 3,
        RelationType::LowerThan => 4,
        _ => u8::MAX,
    }
}

/// Build the full scene graph for a normalized, validated scene.
///
/// Pipeline order: node creation, in-contact pass (best single parent per
/// node), hangable classification and non-contact pass (with mirrored
/// edges), level assignment, horizontal pass within sibling groups,
/// multi-object pass, refinement. Deterministic for fixed (scene, cfg).
pub fn build_scene_graph(
    scene: &ScenePointCloud,
    cfg: &GraphConfig,
    refinement: &RefinementMap,
) -> Result<SceneGraph, GraphError> {
    cfg.validate()?;

    let mut nodes: BTreeMap<u32, ObjectNode> = BTreeMap::new();
    for id in scene.populated_instances() {
        nodes.insert(id, node_from_instance(scene, id)?);
    }

    // The floor root is the largest floor-labeled node by XY area.
    let floor_id = nodes
        .values()
        .filter(|n| cfg.floor_labels.contains(&n.label))
        .max_by(|a, b| {
            a.bbox
                .xy_area()
                .total_cmp(&b.bbox.xy_area())
                .then(b.id.cmp(&a.id))
        })
        .map(|n| n.id)
        .ok_or(GraphError::NoFloor)?;

    let ids: Vec<u32> = nodes.keys().copied().collect();

    // In-contact pass: each node keeps its best-scoring parent.
    let mut parents: BTreeMap<u32, (u32, RelationType)> = BTreeMap::new();
    for &target in &ids {
        if target == floor_id {
            continue;
        }
        let mut best: Option<(f64, f64, u32, RelationType)> = None;
        for &anchor in &ids {
            if anchor == target {
                continue;
            }
            if let Some(rel) = vertical_in_contact(&nodes[&target], &nodes[&anchor], cfg) {
                let (footprint, gap) = in_contact_score(&nodes[&target], &nodes[&anchor]);
                let better = match &best {
                    None => true,
                    Some((bf, bg, bid, _)) => footprint
                        .total_cmp(bf)
                        .then(bg.total_cmp(&gap))
                        .then(bid.cmp(&anchor))
                        .is_gt(),
                };
                if better {
                    best = Some((footprint, gap, anchor, rel));
                }
            }
        }
        if let Some((_, _, anchor, rel)) = best {
            parents.insert(target, (anchor, rel));
        }
    }

    // Hangable classification.
    let anchored_targets: BTreeSet<u32> = parents.values().map(|(anchor, _)| *anchor).collect();
    let hangable: Vec<u32> = ids
        .iter()
        .copied()
        .filter(|id| *id != floor_id && !parents.contains_key(id))
        .filter(|id| !cfg.hangable_requires_no_contact_either_way || !anchored_targets.contains(id))
        .collect();

    // Non-contact pass over hangable nodes, mirrored so that above/below and
    // higher/lower always come in pairs. The floor root is not an anchor here:
    // every hangable object trivially floats above it.
    let mut edges: Vec<RelationEdge> = Vec::new();
    for &target in &hangable {
        for &anchor in &ids {
            if anchor == target || anchor == floor_id {
                continue;
            }
            if let Some(rel) = vertical_non_contact(&nodes[&target], &nodes[&anchor], cfg) {
                edges.push(RelationEdge {
                    source: target,
                    target: anchor,
                    relation: rel,
                    geom: vertical_geom(&nodes[&target], &nodes[&anchor]),
                });
                if let Some(mirrored) = mirror_relation(rel) {
                    edges.push(RelationEdge {
                        source: anchor,
                        target: target,
                        relation: mirrored,
                        geom: vertical_geom(&nodes[&anchor], &nodes[&target]),
                    });
                }
            }
        }
    }

    // Primary non-contact anchor per hangable node, for level inheritance.
    let mut anchor_of_hangable: BTreeMap<u32, u32> = BTreeMap::new();
    for &id in &hangable {
        let primary = edges
            .iter()
            .filter(|e| e.source == id && non_contact_rank(e.relation) != u8::MAX)
            .min_by_key(|e| (non_contact_rank(e.relation), e.target))
            .map(|e| e.target);
        if let Some(anchor) = primary {
            anchor_of_hangable.insert(id, anchor);
        }
    }

    let parent_ids: BTreeMap<u32, u32> = parents.iter().map(|(&c, &(p, _))| (c, p)).collect();
    let levels = assign_levels(&ids, floor_id, &parent_ids, &anchor_of_hangable)?;
    for (id, node) in nodes.iter_mut() {
        node.level = levels.get(id).copied();
    }

    // The hierarchy invariant: edges may span at most one level. Non-contact
    // edges to anchors further away are dropped together with their mirrors.
    edges.retain(|e| (levels[&e.source] - levels[&e.target]).abs() <= 1);

    // In-contact edges from the chosen parents.
    for (&child, &(parent, rel)) in &parents {
        edges.push(RelationEdge {
            source: child,
            target: parent,
            relation: rel,
            geom: vertical_geom(&nodes[&child], &nodes[&parent]),
        });
    }

    // Horizontal pass within sibling groups (same in-contact parent).
    let mut sibling_groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&child, &parent) in &parent_ids {
        sibling_groups.entry(parent).or_default().push(child);
    }
    for group in sibling_groups.values() {
        for &target in group {
            for &anchor in group {
                if target == anchor {
                    continue;
                }
                if let Some((rel, geom)) = horizontal(&nodes[&target], &nodes[&anchor], cfg) {
                    edges.push(RelationEdge { source: target, target: anchor, relation: rel, geom });
                }
            }
        }
    }

    // Multi-object pass.
    let scene_diag = {
        let union = nodes
            .values()
            .map(|n| n.bbox)
            .reduce(|a, b| Aabb::new(
                [a.min[0].min(b.min[0]), a.min[1].min(b.min[1]), a.min[2].min(b.min[2])],
                [a.max[0].max(b.max[0]), a.max[1].max(b.max[1]), a.max[2].max(b.max[2])],
            ))
            .expect("at least the floor node exists");
        let [ex, ey, _] = union.size();
        (ex * ex + ey * ey).sqrt()
    };
    let delta = cfg.aligned_delta_floor_m.max(cfg.aligned_delta_scale * scene_diag);
    let mut multi = between_relations(&edges);
    multi.extend(aligned_relations(&sibling_groups, &nodes, delta));
    multi.sort_by(|a, b| {
        (a.kind, a.target, &a.anchors, a.axis).cmp(&(b.kind, b.target, &b.anchors, b.axis))
    });

    // Deterministic edge order and exact-duplicate removal (mirrors emitted
    // from both sides of a hangable pair coincide).
    edges.sort_by(|a, b| {
        (a.source, a.target, a.relation.canonical()).cmp(&(b.source, b.target, b.relation.canonical()))
    });
    edges.dedup_by(|a, b| (a.source, a.target, a.relation) == (b.source, b.target, b.relation));

    refinement.apply(&mut edges, |id| {
        nodes.get(&id).map(|n| n.label.as_str()).unwrap_or("?")
    });

    Ok(SceneGraph {
        scene_id: scene.scene_id.clone(),
        room_type: scene.room_type.clone(),
        seed: cfg.seed,
        config_digest: cfg.digest(),
        nodes,
        edges,
        multi,
    })
}

/// Convenience: all edges of a graph grouped by category.
pub fn edges_by_category(graph: &SceneGraph) -> BTreeMap<RelationCategory, Vec<&RelationEdge>> {
    let mut out: BTreeMap<RelationCategory, Vec<&RelationEdge>> = BTreeMap::new();
    for edge in &graph.edges {
        out.entry(edge.relation.category()).or_default().push(edge);
    }
    out
}
