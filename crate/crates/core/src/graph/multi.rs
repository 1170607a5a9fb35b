//! Multi-object relations: `between` and `aligned`.

use std::collections::BTreeMap;

use crate::scene::{AlignAxis, MultiKind, MultiRelation, ObjectNode, RelationEdge, RelationType};

/// Extract `between` triplets: any node with at least one left-of and one
/// right-of in-edge from siblings sits between its nearest such pair.
pub fn between_relations(edges: &[RelationEdge]) -> Vec<MultiRelation> {
    let mut left_in: BTreeMap<u32, Vec<(f64, u32)>> = BTreeMap::new();
    let mut right_in: BTreeMap<u32, Vec<(f64, u32)>> = BTreeMap::new();
    for edge in edges {
        match edge.relation {
            RelationType::LeftOf => left_in
                .entry(edge.target)
                .or_default()
                .push((edge.geom.distance, edge.source)),
            RelationType::RightOf => right_in
                .entry(edge.target)
                .or_default()
                .push((edge.geom.distance, edge.source)),
            _ => {}
        }
    }
    let nearest = |candidates: &[(f64, u32)]| {
        candidates
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|&(_, id)| id)
            .expect("non-empty candidate list")
    };
    let mut out = Vec::new();
    for (&target, lefts) in &left_in {
        if let Some(rights) = right_in.get(&target) {
            out.push(MultiRelation {
                kind: MultiKind::Between,
                target: Some(target),
                anchors: vec![nearest(lefts), nearest(rights)],
                axis: None,
            });
        }
    }
    out
}

/// Extract maximal aligned groups of >= 3 siblings whose centroids agree on
/// the X or Y coordinate within `delta`. The reported axis is the coordinate
/// the group agrees on; members are ordered along the spread coordinate.
pub fn aligned_relations(
    sibling_groups: &BTreeMap<u32, Vec<u32>>,
    nodes: &BTreeMap<u32, ObjectNode>,
    delta: f64,
) -> Vec<MultiRelation> {
    let mut out = Vec::new();
    for group in sibling_groups.values() {
        if group.len() < 3 {
            continue;
        }
        for (axis, agree_coord, spread_coord) in [(AlignAxis::X, 0usize, 1usize), (AlignAxis::Y, 1usize, 0usize)]
        {
            let mut members: Vec<(f64, u32)> = group
                .iter()
                .map(|&id| (nodes[&id].centroid[agree_coord], id))
                .collect();
            members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            // maximal windows with coordinate range <= delta
            let mut prev_end = 0usize;
            let mut end = 0usize;
            for start in 0..members.len() {
                if end < start {
                    end = start;
                }
                while end < members.len() && members[end].0 - members[start].0 <= delta {
                    end += 1;
                }
                let is_maximal = start == 0 || end > prev_end;
                if is_maximal && end - start >= 3 {
                    let mut ids: Vec<u32> = members[start..end].iter().map(|&(_, id)| id).collect();
                    ids.sort_by(|a, b| {
                        nodes[a].centroid[spread_coord]
                            .total_cmp(&nodes[b].centroid[spread_coord])
                            .then(a.cmp(b))
                    });
                    out.push(MultiRelation {
                        kind: MultiKind::Aligned,
                        target: None,
                        anchors: ids,
                        axis: Some(axis),
                    });
                }
                prev_end = end;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Aabb, EdgeGeom};

    fn node(id: u32, cx: f64, cy: f64) -> ObjectNode {
        let bbox = Aabb::new([cx - 0.2, cy - 0.2, 0.0], [cx + 0.2, cy + 0.2, 0.5]);
        ObjectNode {
            id,
            label: format!("n{id}"),
            centroid: bbox.center(),
            bbox,
            level: Some(0),
            point_count: 8,
        }
    }

    fn edge(source: u32, target: u32, relation: RelationType, distance: f64) -> RelationEdge {
        RelationEdge {
            source,
            target,
            relation,
            geom: EdgeGeom { distance, theta_h: 0.0, theta_v: 0.0, close: false, adjacent: false },
        }
    }

    #[test]
    fn flanked_bed_is_between_nightstand_and_lamp() {
        // nightstand(1) left of bed(2), lamp(3) right of bed(2)
        let edges = vec![
            edge(1, 2, RelationType::LeftOf, 0.9),
            edge(3, 2, RelationType::RightOf, 1.1),
        ];
        let rels = between_relations(&edges);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].target, Some(2));
        assert_eq!(rels[0].anchors, vec![1, 3]);
    }

    #[test]
    fn nearest_pair_wins() {
        let edges = vec![
            edge(1, 2, RelationType::LeftOf, 2.0),
            edge(4, 2, RelationType::LeftOf, 0.5),
            edge(3, 2, RelationType::RightOf, 1.0),
            edge(5, 2, RelationType::RightOf, 1.5),
        ];
        let rels = between_relations(&edges);
        assert_eq!(rels[0].anchors, vec![4, 3]);
    }

    #[test]
    fn three_chairs_in_a_row_align_on_y() {
        // y coordinates 1.20, 1.22, 1.18 agree within 0.1
        let nodes = BTreeMap::from([
            (1, node(1, 0.0, 1.20)),
            (2, node(2, 1.0, 1.22)),
            (3, node(3, 2.0, 1.18)),
        ]);
        let groups = BTreeMap::from([(0u32, vec![1, 2, 3])]);
        let rels = aligned_relations(&groups, &nodes, 0.1);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].axis, Some(AlignAxis::Y));
        assert_eq!(rels[0].anchors, vec![1, 2, 3]);
    }

    #[test]
    fn two_objects_never_align() {
        let nodes = BTreeMap::from([(1, node(1, 0.0, 1.0)), (2, node(2, 1.0, 1.0))]);
        let groups = BTreeMap::from([(0u32, vec![1, 2])]);
        assert!(aligned_relations(&groups, &nodes, 0.1).is_empty());
    }

    #[test]
    fn spread_beyond_delta_splits_groups() {
        let nodes = BTreeMap::from([
            (1, node(1, 0.0, 1.0)),
            (2, node(2, 1.0, 1.02)),
            (3, node(3, 2.0, 1.04)),
            (4, node(4, 3.0, 1.50)),
        ]);
        let groups = BTreeMap::from([(0u32, vec![1, 2, 3, 4])]);
        let rels = aligned_relations(&groups, &nodes, 0.1);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels[0].anchors, vec![1, 2, 3]);
    }
}
