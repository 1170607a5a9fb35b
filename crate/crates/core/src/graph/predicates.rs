//! Geometric relation predicates over object node pairs.
//!
//! Every predicate is a pure function of the two bounding boxes, their
//! centroids and the config thresholds, evaluated in a fixed precedence
//! order so the first match wins.

use crate::scene::{EdgeGeom, ObjectNode, RelationType};

use super::GraphConfig;

/// In-contact precedence: inside > embedded-into > placed-in > supported-by.
pub fn vertical_in_contact(
    target: &ObjectNode,
    anchor: &ObjectNode,
    cfg: &GraphConfig,
) -> Option<RelationType> {
    debug_assert_ne!(target.id, anchor.id);
    let c = target.bbox.containment_fraction(&anchor.bbox);
    if c >= cfg.containment_inside && target.bbox.volume() < anchor.bbox.volume() {
        return Some(RelationType::Inside);
    }
    if (cfg.containment_embedded..cfg.containment_inside).contains(&c) {
        return Some(RelationType::EmbeddedInto);
    }
    if cfg.container_labels.contains(&anchor.label)
        && target.bbox.xy_within(&anchor.bbox)
        && target.bbox.min[2] >= anchor.bbox.min[2]
        && target.bbox.min[2] <= anchor.bbox.max[2]
    {
        return Some(RelationType::PlacedIn);
    }
    let gap = target.bbox.min[2] - anchor.bbox.max[2];
    let footprint = target.bbox.xy_containment_fraction(&anchor.bbox);
    if gap.abs() <= cfg.eps_contact_m
        && target.bbox.min[2] >= anchor.bbox.max[2] - cfg.eps_contact_m
        && footprint >= cfg.footprint_overlap_min
    {
        return Some(RelationType::SupportedBy);
    }
    None
}

/// Support score used to pick the single best in-contact parent:
/// larger footprint overlap wins, then smaller z gap, then smaller anchor id.
pub fn in_contact_score(target: &ObjectNode, anchor: &ObjectNode) -> (f64, f64) {
    let footprint = target.bbox.xy_containment_fraction(&anchor.bbox);
    let gap = (target.bbox.min[2] - anchor.bbox.max[2]).abs();
    (footprint, gap)
}

/// Fraction of the smaller XY footprint covered by the overlap.
fn xy_overlap_of_smaller(a: &ObjectNode, b: &ObjectNode) -> f64 {
    if a.bbox.xy_area() <= b.bbox.xy_area() {
        a.bbox.xy_containment_fraction(&b.bbox)
    } else {
        b.bbox.xy_containment_fraction(&a.bbox)
    }
}

/// Non-contact precedence: hanging-on > above/below > higher/lower-than.
///
/// Only `hanging-on`, `above`, `below`, `higher-than` and `lower-than` are
/// ever produced; `affixed-on` and `mounted-on` come from the refinement
/// table alone.
pub fn vertical_non_contact(
    target: &ObjectNode,
    anchor: &ObjectNode,
    cfg: &GraphConfig,
) -> Option<RelationType> {
    debug_assert_ne!(target.id, anchor.id);
    if cfg.wall_labels.contains(&anchor.label)
        && target.bbox.xy_gap(&anchor.bbox) <= cfg.hang_gap_m
        && target.bbox.z_overlaps(&anchor.bbox)
    {
        return Some(RelationType::HangingOn);
    }
    let overlap = xy_overlap_of_smaller(target, anchor);
    if overlap >= cfg.above_overlap_min {
        if target.bbox.min[2] >= anchor.bbox.max[2] + cfg.eps_contact_m {
            return Some(RelationType::Above);
        }
        if anchor.bbox.min[2] >= target.bbox.max[2] + cfg.eps_contact_m {
            return Some(RelationType::Below);
        }
    }
    let dz = target.centroid[2] - anchor.centroid[2];
    let dx = target.centroid[0] - anchor.centroid[0];
    let dy = target.centroid[1] - anchor.centroid[1];
    let xy_dist = (dx * dx + dy * dy).sqrt();
    if xy_dist <= cfg.higher_max_xy_m && !target.bbox.xy_overlaps(&anchor.bbox) {
        if dz >= cfg.higher_min_dz_m {
            return Some(RelationType::HigherThan);
        }
        if -dz >= cfg.higher_min_dz_m {
            return Some(RelationType::LowerThan);
        }
    }
    None
}

/// The mirrored relation emitted on the reverse edge, when one exists.
pub fn mirror_relation(rel: RelationType) -> Option<RelationType> {
    Some(match rel {
        RelationType::Above => RelationType::Below,
        RelationType::Below => RelationType::Above,
        RelationType::HigherThan => RelationType::LowerThan,
        RelationType::LowerThan => RelationType::HigherThan,
        RelationType::LeftOf => RelationType::RightOf,
        RelationType::RightOf => RelationType::LeftOf,
        RelationType::Behind => RelationType::InFrontOf,
        RelationType::InFrontOf => RelationType::Behind,
        _ => return None,
    })
}

/// Edge geometry for vertical relations: 3D centroid distance plus the
/// horizontal and vertical angles of the anchor-to-source displacement.
pub fn vertical_geom(source: &ObjectNode, anchor: &ObjectNode) -> EdgeGeom {
    let dx = source.centroid[0] - anchor.centroid[0];
    let dy = source.centroid[1] - anchor.centroid[1];
    let dz = source.centroid[2] - anchor.centroid[2];
    let xy = (dx * dx + dy * dy).sqrt();
    EdgeGeom {
        distance: (dx * dx + dy * dy + dz * dz).sqrt(),
        theta_h: dy.atan2(dx),
        theta_v: dz.atan2(xy),
        close: false,
        adjacent: false,
    }
}

/// 90-degree sector assignment for the horizontal angle, half-open at the
/// counterclockwise end: right (-45, 45], front (45, 135], left (135, 180]
/// and (-180, -135], behind (-135, -45].
pub fn sector(theta_h: f64) -> RelationType {
    let quarter = std::f64::consts::FRAC_PI_4;
    if theta_h > -quarter && theta_h <= quarter {
        RelationType::RightOf
    } else if theta_h > quarter && theta_h <= 3.0 * quarter {
        RelationType::InFrontOf
    } else if theta_h > -3.0 * quarter && theta_h <= -quarter {
        RelationType::Behind
    } else {
        RelationType::LeftOf
    }
}

/// Directional horizontal relation in the normalized room frame
/// (+X = right, +Y = front, 90-degree sectors centered on the axes),
/// with distance and proximity grades in the geometry.
///
/// Returns `None` when the XY centroids coincide.
pub fn horizontal(
    target: &ObjectNode,
    anchor: &ObjectNode,
    cfg: &GraphConfig,
) -> Option<(RelationType, EdgeGeom)> {
    debug_assert_ne!(target.id, anchor.id);
    let dx = target.centroid[0] - anchor.centroid[0];
    let dy = target.centroid[1] - anchor.centroid[1];
    let dz = target.centroid[2] - anchor.centroid[2];
    let r = (dx * dx + dy * dy).sqrt();
    if r < 1e-9 {
        return None;
    }
    let theta_h = dy.atan2(dx);
    let relation = sector(theta_h);
    let geom = EdgeGeom {
        distance: r,
        theta_h,
        theta_v: dz.atan2(r),
        close: r <= cfg.close_max_m,
        adjacent: target.bbox.gap(&anchor.bbox) <= cfg.adjacent_gap_m,
    };
    Some((relation, geom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Aabb;

    fn node(id: u32, label: &str, min: [f64; 3], max: [f64; 3]) -> ObjectNode {
        let bbox = Aabb::new(min, max);
        ObjectNode {
            id,
            label: label.into(),
            centroid: bbox.center(),
            bbox,
            level: None,
            point_count: 8,
        }
    }

    fn cfg() -> GraphConfig {
        GraphConfig::default()
    }

    #[test]
    fn table_on_floor_is_supported() {
        let floor = node(0, "floor", [0.0, 0.0, 0.0], [4.0, 4.0, 0.05]);
        let table = node(1, "table", [1.0, 1.0, 0.05], [2.0, 2.0, 0.8]);
        // g = 0.05 - 0.05 = 0, footprint fully above the floor -> f = 1
        assert_eq!(vertical_in_contact(&table, &floor, &cfg()), Some(RelationType::SupportedBy));
        assert_eq!(vertical_in_contact(&floor, &table, &cfg()), None);
    }

    #[test]
    fn cup_on_table_is_supported() {
        let table = node(1, "table", [1.0, 1.0, 0.05], [2.0, 2.0, 0.8]);
        let cup = node(2, "cup", [1.4, 1.4, 0.8], [1.6, 1.6, 0.9]);
        assert_eq!(vertical_in_contact(&cup, &table, &cfg()), Some(RelationType::SupportedBy));
    }

    #[test]
    fn book_fully_inside_drawer() {
        let drawer = node(3, "drawer", [0.0, 0.0, 0.3], [0.6, 0.5, 0.6]);
        let book = node(4, "book", [0.1, 0.1, 0.35], [0.3, 0.25, 0.4]);
        assert_eq!(vertical_in_contact(&book, &drawer, &cfg()), Some(RelationType::Inside));
    }

    #[test]
    fn half_sunk_sink_is_embedded() {
        let counter = node(5, "countertop", [0.0, 0.0, 0.8], [2.0, 0.7, 0.95]);
        let sink = node(6, "sink", [0.5, 0.1, 0.7], [1.0, 0.6, 0.9]);
        // z overlap [0.8, 0.9] of a 0.2-high box -> c = 0.5 exactly
        let c = sink.bbox.containment_fraction(&counter.bbox);
        assert!((c - 0.5).abs() < 1e-12);
        assert_eq!(vertical_in_contact(&sink, &counter, &cfg()), Some(RelationType::EmbeddedInto));
    }

    #[test]
    fn tall_item_in_container_is_placed_in() {
        let basket = node(7, "basket", [0.0, 0.0, 0.05], [0.5, 0.5, 0.35]);
        let lamp = node(8, "lamp", [0.2, 0.2, 0.1], [0.3, 0.3, 1.1]);
        let c = lamp.bbox.containment_fraction(&basket.bbox);
        assert!(c < 0.5, "containment {c} must fall below the embedded band");
        assert_eq!(vertical_in_contact(&lamp, &basket, &cfg()), Some(RelationType::PlacedIn));
    }

    #[test]
    fn painting_two_cm_from_wall_hangs() {
        let wall = node(9, "wall", [0.0, 3.95, 0.05], [4.0, 4.0, 2.5]);
        let painting = node(10, "painting", [1.0, 3.9, 1.2], [1.8, 3.93, 1.8]);
        assert!((painting.bbox.xy_gap(&wall.bbox) - 0.02).abs() < 1e-12);
        assert_eq!(vertical_non_contact(&painting, &wall, &cfg()), Some(RelationType::HangingOn));
    }

    #[test]
    fn lamp_over_table_is_above() {
        let table = node(1, "table", [1.0, 1.0, 0.05], [2.0, 2.0, 0.8]);
        let lamp = node(11, "lamp", [1.3, 1.3, 1.1], [1.7, 1.7, 1.4]);
        assert_eq!(vertical_non_contact(&lamp, &table, &cfg()), Some(RelationType::Above));
        assert_eq!(vertical_non_contact(&table, &lamp, &cfg()), Some(RelationType::Below));
    }

    #[test]
    fn identical_centroids_yield_nothing() {
        let a = node(12, "a", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let mut b = node(13, "b", [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        b.label = "b".into();
        assert_eq!(vertical_non_contact(&a, &b, &cfg()), None);
        assert!(horizontal(&a, &b, &cfg()).is_none());
    }

    #[test]
    fn clock_higher_than_disjoint_stool() {
        let clock = node(14, "clock", [0.4, 0.4, 1.9], [0.6, 0.6, 2.1]);
        let stool = node(15, "stool", [1.2, 1.2, 0.05], [1.6, 1.6, 0.45]);
        assert_eq!(vertical_non_contact(&clock, &stool, &cfg()), Some(RelationType::HigherThan));
        assert_eq!(vertical_non_contact(&stool, &clock, &cfg()), Some(RelationType::LowerThan));
    }

    #[test]
    fn chair_right_of_table_with_expected_angle() {
        // chair centroid (2.75, 1.45), table centroid (1.5, 1.5)
        let table = node(1, "table", [1.0, 1.0, 0.05], [2.0, 2.0, 0.8]);
        let chair = node(2, "chair", [2.5, 1.2, 0.05], [3.0, 1.7, 0.5]);
        let (rel, geom) = horizontal(&chair, &table, &cfg()).unwrap();
        assert_eq!(rel, RelationType::RightOf);
        assert!((geom.distance - (1.25f64 * 1.25 + 0.05 * 0.05).sqrt()).abs() < 1e-12);
        assert!((geom.theta_h.to_degrees() - (-2.29)).abs() < 0.01);
        assert!(geom.distance <= cfg().near_max_m, "grade is near");
        let (back, _) = horizontal(&table, &chair, &cfg()).unwrap();
        assert_eq!(back, RelationType::LeftOf);
    }

    #[test]
    fn straight_ahead_is_in_front_of() {
        let anchor = node(1, "sofa", [-0.5, -0.5, 0.0], [0.5, 0.5, 1.0]);
        let target = node(2, "suitcase", [-0.3, 2.7, 0.0], [0.3, 3.3, 0.6]);
        let (rel, geom) = horizontal(&target, &anchor, &cfg()).unwrap();
        assert_eq!(rel, RelationType::InFrontOf);
        assert!((geom.distance - 3.0).abs() < 1e-12);
        assert!(geom.distance > cfg().near_max_m, "grade would be far");
    }

    #[test]
    fn sector_boundaries_follow_half_open_rule() {
        use std::f64::consts::{FRAC_PI_4, PI};
        assert_eq!(sector(0.0), RelationType::RightOf);
        assert_eq!(sector(FRAC_PI_4), RelationType::RightOf);
        assert_eq!(sector(FRAC_PI_4 + 1e-12), RelationType::InFrontOf);
        assert_eq!(sector(3.0 * FRAC_PI_4), RelationType::InFrontOf);
        assert_eq!(sector(PI), RelationType::LeftOf);
        assert_eq!(sector(-3.0 * FRAC_PI_4), RelationType::Behind);
        assert_eq!(sector(-FRAC_PI_4), RelationType::Behind);
        assert_eq!(sector(-PI + 1e-12), RelationType::LeftOf);
    }

    #[test]
    fn proximity_grades_are_set_on_close_pairs() {
        let a = node(1, "chair", [0.0, 0.0, 0.0], [0.4, 0.4, 0.9]);
        let b = node(2, "chair", [0.5, 0.0, 0.0], [0.9, 0.4, 0.9]);
        let (_, geom) = horizontal(&a, &b, &cfg()).unwrap();
        assert!(geom.close, "0.5 m centroid distance is close");
        assert!(geom.adjacent, "0.1 m box gap is adjacent");
    }
}
