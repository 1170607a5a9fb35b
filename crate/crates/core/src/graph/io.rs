//! Scene graph JSON form, byte-stable: arrays sorted by id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scene::{
    Aabb, AlignAxis, EdgeGeom, MultiKind, MultiRelation, ObjectNode, RelationEdge, RelationType,
    SceneGraph,
};

use super::GraphError;

#[derive(Serialize, Deserialize)]
struct GraphJson {
    scene_id: String,
    seed: u64,
    config_digest: String,
    room_type: Option<String>,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    multi: Vec<MultiJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: u32,
    label: String,
    centroid: [f64; 3],
    size: [f64; 3],
    level: i32,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    source: u32,
    target: u32,
    relation: RelationType,
    distance: f64,
    theta_h_deg: f64,
    theta_v_deg: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    proximity: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MultiJson {
    kind: MultiKind,
    target: Option<u32>,
    anchors: Vec<u32>,
    axis: Option<AlignAxis>,
}

/// Serialize a graph to its canonical JSON string (compact, sorted arrays).
pub fn graph_to_json_string(graph: &SceneGraph) -> String {
    let nodes = graph
        .nodes
        .values()
        .map(|n| NodeJson {
            id: n.id,
            label: n.label.clone(),
            centroid: n.centroid,
            size: n.size(),
            level: n.level.unwrap_or(0),
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| {
            let mut proximity = Vec::new();
            if e.geom.close {
                proximity.push("close".to_string());
            }
            if e.geom.adjacent {
                proximity.push("adjacent".to_string());
            }
            EdgeJson {
                source: e.source,
                target: e.target,
                relation: e.relation,
                distance: e.geom.distance,
                theta_h_deg: e.geom.theta_h.to_degrees(),
                theta_v_deg: e.geom.theta_v.to_degrees(),
                proximity,
            }
        })
        .collect();
    let multi = graph
        .multi
        .iter()
        .map(|m| MultiJson { kind: m.kind, target: m.target, anchors: m.anchors.clone(), axis: m.axis })
        .collect();
    let raw = GraphJson {
        scene_id: graph.scene_id.clone(),
        seed: graph.seed,
        config_digest: graph.config_digest.clone(),
        room_type: graph.room_type.clone(),
        nodes,
        edges,
        multi,
    };
    serde_json::to_string(&raw).expect("graph serialization cannot fail")
}

/// Parse a graph from its canonical JSON string.
pub fn graph_from_json_str(text: &str) -> Result<SceneGraph, GraphError> {
    let raw: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let mut nodes = BTreeMap::new();
    for n in raw.nodes {
        let half = [n.size[0] / 2.0, n.size[1] / 2.0, n.size[2] / 2.0];
        let bbox = Aabb::new(
            [n.centroid[0] - half[0], n.centroid[1] - half[1], n.centroid[2] - half[2]],
            [n.centroid[0] + half[0], n.centroid[1] + half[1], n.centroid[2] + half[2]],
        );
        nodes.insert(
            n.id,
            ObjectNode {
                id: n.id,
                label: n.label,
                centroid: n.centroid,
                bbox,
                level: Some(n.level),
                point_count: 0,
            },
        );
    }
    let edges = raw
        .edges
        .into_iter()
        .map(|e| RelationEdge {
            source: e.source,
            target: e.target,
            relation: e.relation,
            geom: EdgeGeom {
                distance: e.distance,
                theta_h: e.theta_h_deg.to_radians(),
                theta_v: e.theta_v_deg.to_radians(),
                close: e.proximity.iter().any(|p| p == "close"),
                adjacent: e.proximity.iter().any(|p| p == "adjacent"),
            },
        })
        .collect();
    let multi = raw
        .multi
        .into_iter()
        .map(|m| MultiRelation { kind: m.kind, target: m.target, anchors: m.anchors, axis: m.axis })
        .collect();
    Ok(SceneGraph {
        scene_id: raw.scene_id,
        room_type: raw.room_type,
        seed: raw.seed,
        config_digest: raw.config_digest,
        nodes,
        edges,
        multi,
    })
}
