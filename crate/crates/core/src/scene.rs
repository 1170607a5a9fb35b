//! Core domain types shared by every pipeline stage.
//!
//! All types here are immutable after construction and safe to share across
//! threads. Distances are meters, angles are radians; degrees appear only at
//! serialization boundaries.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One point of an instance-annotated point cloud: position, color,
/// instance id and semantic id.
///
/// Color channels are kept as wide integers so that out-of-range inputs can
/// be loaded and then reported by [`validate_scene`] instead of being lost at
/// decode time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: i32,
    pub g: i32,
    pub b: i32,
    pub instance_id: u32,
    pub semantic_id: u32,
}

impl PointRecord {
    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// An instance-annotated scene point cloud plus its instance label table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePointCloud {
    pub scene_id: String,
    pub source_dataset: String,
    pub room_type: Option<String>,
    /// instance id -> semantic label
    pub instances: BTreeMap<u32, String>,
    pub points: Vec<PointRecord>,
}

impl ScenePointCloud {
    /// Indices of the points belonging to `instance_id`, in point order.
    pub fn instance_point_indices(&self, instance_id: u32) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.instance_id == instance_id)
            .map(|(i, _)| i)
            .collect()
    }

    /// Instance ids that own at least one point, ascending.
    pub fn populated_instances(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .instances
            .keys()
            .copied()
            .filter(|id| self.points.iter().any(|p| p.instance_id == *id))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Axis-aligned bounds over every point in the scene.
    pub fn bounds(&self) -> Option<Aabb> {
        Aabb::from_points(self.points.iter().map(|p| p.position()))
    }
}

/// Axis-aligned bounding box, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Aabb { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = [f64; 3]>>(points: I) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = first;
        let mut max = first;
        for p in iter {
            for k in 0..3 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Some(Aabb { min, max })
    }

    pub fn center(&self) -> [f64; 3] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn size(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s[0] * s[1] * s[2]
    }

    pub fn xy_area(&self) -> f64 {
        let s = self.size();
        s[0] * s[1]
    }

    pub fn contains_point(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let mut min = [0.0; 3];
        let mut max = [0.0; 3];
        for k in 0..3 {
            min[k] = self.min[k].max(other.min[k]);
            max[k] = self.max[k].min(other.max[k]);
            if min[k] > max[k] {
                return None;
            }
        }
        Some(Aabb { min, max })
    }

    /// Area of the XY footprint intersection (zero when disjoint).
    pub fn xy_intersection_area(&self, other: &Aabb) -> f64 {
        let w = (self.max[0].min(other.max[0]) - self.min[0].max(other.min[0])).max(0.0);
        let d = (self.max[1].min(other.max[1]) - self.min[1].max(other.min[1])).max(0.0);
        w * d
    }

    /// True when the XY footprints overlap with positive area on both axes.
    pub fn xy_overlaps(&self, other: &Aabb) -> bool {
        self.max[0] > other.min[0]
            && other.max[0] > self.min[0]
            && self.max[1] > other.min[1]
            && other.max[1] > self.min[1]
    }

    /// True when this box's XY footprint lies fully within `other`'s.
    pub fn xy_within(&self, other: &Aabb) -> bool {
        self.min[0] >= other.min[0]
            && self.max[0] <= other.max[0]
            && self.min[1] >= other.min[1]
            && self.max[1] <= other.max[1]
    }

    /// Euclidean separation of the XY footprints (zero when they touch or overlap).
    pub fn xy_gap(&self, other: &Aabb) -> f64 {
        let gx = (self.min[0] - other.max[0]).max(other.min[0] - self.max[0]).max(0.0);
        let gy = (self.min[1] - other.max[1]).max(other.min[1] - self.max[1]).max(0.0);
        (gx * gx + gy * gy).sqrt()
    }

    /// Euclidean separation of the full boxes (zero when they touch or overlap).
    pub fn gap(&self, other: &Aabb) -> f64 {
        let mut acc = 0.0;
        for k in 0..3 {
            let g = (self.min[k] - other.max[k]).max(other.min[k] - self.max[k]).max(0.0);
            acc += g * g;
        }
        acc.sqrt()
    }

    /// True when z intervals overlap (closed intervals).
    pub fn z_overlaps(&self, other: &Aabb) -> bool {
        self.min[2] <= other.max[2] && other.min[2] <= self.max[2]
    }

    /// Fraction of this box contained in `other`, as the product of per-axis
    /// overlap ratios. Degenerate axes (zero extent) count 1 when the slab
    /// lies inside `other`'s interval and 0 otherwise, which makes the value
    /// agree with the volume ratio whenever the box is non-degenerate.
    pub fn containment_fraction(&self, other: &Aabb) -> f64 {
        self.axis_containment_fraction(other, 0..3)
    }

    /// XY-footprint variant of [`Aabb::containment_fraction`]: equals
    /// intersection area over this box's footprint area when non-degenerate.
    pub fn xy_containment_fraction(&self, other: &Aabb) -> f64 {
        self.axis_containment_fraction(other, 0..2)
    }

    fn axis_containment_fraction(&self, other: &Aabb, axes: std::ops::Range<usize>) -> f64 {
        let mut frac = 1.0;
        for k in axes {
            let len = self.max[k] - self.min[k];
            if len > 0.0 {
                let overlap = (self.max[k].min(other.max[k]) - self.min[k].max(other.min[k])).max(0.0);
                frac *= overlap / len;
            } else {
                let inside = self.min[k] >= other.min[k] && self.max[k] <= other.max[k];
                if !inside {
                    return 0.0;
                }
            }
        }
        frac
    }
}

/// One object instance of a scene graph: centroid, bounds, label, hierarchy level.
///
/// The centroid is the bounding-box center. `level` is `None` until hierarchy
/// assignment runs; the floor root uses level -1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub id: u32,
    pub label: String,
    pub centroid: [f64; 3],
    pub bbox: Aabb,
    pub level: Option<i32>,
    pub point_count: usize,
}

impl ObjectNode {
    pub fn size(&self) -> [f64; 3] {
        self.bbox.size()
    }
}

/// Relation taxonomy category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationCategory {
    InContactVertical,
    NonContactVertical,
    Horizontal,
    MultiObject,
}

macro_rules! relation_types {
    ($(($variant:ident, $name:literal, $cat:ident)),+ $(,)?) => {
        /// The 21 spatial relation types, partitioned into four categories.
        ///
        /// Left/right relations carry their near/far distance grade on the edge
        /// geometry (compare `distance` against the configured near threshold),
        /// not in the type.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum RelationType {
            $($variant),+
        }

        impl RelationType {
            pub const ALL: [RelationType; 21] = [$(RelationType::$variant),+];

            /// Canonical kebab-case name, used in every serialized artifact.
            pub fn canonical(&self) -> &'static str {
                match self {
                    $(RelationType::$variant => $name),+
                }
            }

            pub fn category(&self) -> RelationCategory {
                match self {
                    $(RelationType::$variant => RelationCategory::$cat),+
                }
            }
        }

        impl FromStr for RelationType {
            type Err = UnknownRelation;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(RelationType::$variant),)+
                    other => Err(UnknownRelation(other.to_string())),
                }
            }
        }
    };
}

relation_types! {
    (SupportedBy, "supported-by", InContactVertical),
    (EmbeddedInto, "embedded-into", InContactVertical),
    (PlacedIn, "placed-in", InContactVertical),
    (Inside, "inside", InContactVertical),
    (HangingOn, "hanging-on", NonContactVertical),
    (AffixedOn, "affixed-on", NonContactVertical),
    (MountedOn, "mounted-on", NonContactVertical),
    (Above, "above", NonContactVertical),
    (Below, "below", NonContactVertical),
    (HigherThan, "higher-than", NonContactVertical),
    (LowerThan, "lower-than", NonContactVertical),
    (LeftOf, "left-of", Horizontal),
    (RightOf, "right-of", Horizontal),
    (Behind, "behind", Horizontal),
    (InFrontOf, "in-front-of", Horizontal),
    (CloseTo, "close-to", Horizontal),
    (AdjacentTo, "adjacent-to", Horizontal),
    (Besides, "besides", Horizontal),
    (NextTo, "next-to", Horizontal),
    (Between, "between", MultiObject),
    (Aligned, "aligned", MultiObject),
}

#[derive(Debug, Error)]
#[error("unknown relation type: {0}")]
pub struct UnknownRelation(pub String);

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical())
    }
}

impl Serialize for RelationType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.canonical())
    }
}

impl<'de> Deserialize<'de> for RelationType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Geometric parameters attached to an edge.
///
/// `distance` is the XY centroid distance for horizontal edges (that is the
/// quantity the near/far grade is defined on) and the 3D centroid distance for
/// vertical ones. `theta_h`/`theta_v` are the horizontal and vertical angles of
/// the anchor-to-source displacement, radians. The `close`/`adjacent` proximity
/// grades are set on horizontal edges only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeGeom {
    pub distance: f64,
    pub theta_h: f64,
    pub theta_v: f64,
    #[serde(default)]
    pub close: bool,
    #[serde(default)]
    pub adjacent: bool,
}

/// A directed relation edge: `source` is the subject, `target` the anchor,
/// so `(cup, supported-by, table)` reads "the cup is supported by the table".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub source: u32,
    pub target: u32,
    pub relation: RelationType,
    pub geom: EdgeGeom,
}

/// Axis a group of centroids agrees on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlignAxis {
    X,
    Y,
}

/// Multi-object relation: `between` (target flanked by two anchors) or
/// `aligned` (>=3 members whose centroids agree on one axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiRelation {
    pub kind: MultiKind,
    /// Set for `between` only.
    pub target: Option<u32>,
    /// Two anchors (left, right) for `between`; the ordered members for `aligned`.
    pub anchors: Vec<u32>,
    /// Set for `aligned` only.
    pub axis: Option<AlignAxis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiKind {
    Between,
    Aligned,
}

/// Hierarchical scene graph: nodes, directed relation edges, multi-object
/// relation groups, with provenance (seed + config digest).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub scene_id: String,
    pub room_type: Option<String>,
    pub seed: u64,
    pub config_digest: String,
    pub nodes: BTreeMap<u32, ObjectNode>,
    pub edges: Vec<RelationEdge>,
    pub multi: Vec<MultiRelation>,
}

impl SceneGraph {
    pub fn node(&self, id: u32) -> Option<&ObjectNode> {
        self.nodes.get(&id)
    }

    pub fn label(&self, id: u32) -> &str {
        self.nodes.get(&id).map(|n| n.label.as_str()).unwrap_or("?")
    }

    /// Out-edges of `id` (edges whose subject is `id`).
    pub fn edges_from(&self, id: u32) -> impl Iterator<Item = &RelationEdge> {
        self.edges.iter().filter(move |e| e.source == id)
    }

    /// In-edges of `id` (edges whose anchor is `id`).
    pub fn edges_to(&self, id: u32) -> impl Iterator<Item = &RelationEdge> {
        self.edges.iter().filter(move |e| e.target == id)
    }

    /// Check every structural graph invariant; empty when the graph is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for edge in &self.edges {
            if edge.source == edge.target {
                violations.push(format!("self-edge on node {}", edge.source));
            }
            for end in [edge.source, edge.target] {
                if !self.nodes.contains_key(&end) {
                    violations.push(format!("edge endpoint {end} not in node set"));
                }
            }
            if !seen.insert((edge.source, edge.target, edge.relation)) {
                violations.push(format!(
                    "duplicate edge ({}, {}, {})",
                    edge.source, edge.relation, edge.target
                ));
            }
            if let (Some(a), Some(b)) = (self.nodes.get(&edge.source), self.nodes.get(&edge.target)) {
                if let (Some(la), Some(lb)) = (a.level, b.level) {
                    if (la - lb).abs() > 1 {
                        violations.push(format!(
                            "edge ({}, {}, {}) spans levels {} and {}",
                            edge.source, edge.relation, edge.target, la, lb
                        ));
                    }
                }
            }
        }
        for (id, node) in &self.nodes {
            let parents = self
                .edges_from(*id)
                .filter(|e| e.relation.category() == RelationCategory::InContactVertical)
                .count();
            if parents > 1 {
                violations.push(format!("node {id} has {parents} in-contact parents"));
            }
            if !node.bbox.contains_point(node.centroid) {
                violations.push(format!("node {id} centroid outside bbox"));
            }
            if node.level.is_none() {
                violations.push(format!("node {id} has no level assigned"));
            }
        }
        for rel in &self.multi {
            match rel.kind {
                MultiKind::Between => {
                    if rel.anchors.len() != 2 || rel.target.is_none() {
                        violations.push("between relation without target and 2 anchors".into());
                    }
                }
                MultiKind::Aligned => {
                    if rel.anchors.len() < 3 || rel.axis.is_none() {
                        violations.push("aligned relation with fewer than 3 members or no axis".into());
                    }
                }
            }
            for id in rel.anchors.iter().chain(rel.target.iter()) {
                if !self.nodes.contains_key(id) {
                    violations.push(format!("multi-relation references unknown node {id}"));
                }
            }
        }
        violations
    }
}

/// A single invariant violation found by [`validate_scene`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

/// Check every [`ScenePointCloud`] invariant. Diagnostics only, never fails.
pub fn validate_scene(scene: &ScenePointCloud) -> Vec<Violation> {
    let mut violations = Vec::new();
    if scene.points.is_empty() {
        violations.push(Violation {
            invariant: "point_count",
            detail: "scene has no points".into(),
        });
    }
    // instance id -> (semantic id of first point, example index)
    let mut instance_sem: BTreeMap<u32, u32> = BTreeMap::new();
    for (idx, p) in scene.points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            violations.push(Violation {
                invariant: "finite_coordinates",
                detail: format!("point {idx} has non-finite coordinates"),
            });
        }
        for (channel, value) in [("r", p.r), ("g", p.g), ("b", p.b)] {
            if !(0..=255).contains(&value) {
                violations.push(Violation {
                    invariant: "color_range",
                    detail: format!("point {idx} channel {channel}={value} outside 0..=255"),
                });
            }
        }
        if !scene.instances.contains_key(&p.instance_id) {
            violations.push(Violation {
                invariant: "instance_declared",
                detail: format!("point {idx} references undeclared instance {}", p.instance_id),
            });
        }
        match instance_sem.get(&p.instance_id) {
            None => {
                instance_sem.insert(p.instance_id, p.semantic_id);
            }
            Some(&sem) if sem != p.semantic_id => {
                violations.push(Violation {
                    invariant: "semantic_consistency",
                    detail: format!(
                        "instance {} has points with semantic ids {} and {}",
                        p.instance_id, sem, p.semantic_id
                    ),
                });
            }
            _ => {}
        }
    }
    // Semantic ids must follow labels: same label same id, distinct labels distinct ids.
    let mut label_sem: BTreeMap<&str, (u32, u32)> = BTreeMap::new();
    let mut sem_label: BTreeMap<u32, (&str, u32)> = BTreeMap::new();
    for (&id, &sem) in &instance_sem {
        let label = match scene.instances.get(&id) {
            Some(l) => l.as_str(),
            None => continue,
        };
        match label_sem.get(label) {
            None => {
                label_sem.insert(label, (sem, id));
            }
            Some(&(other_sem, other_id)) if other_sem != sem => {
                violations.push(Violation {
                    invariant: "semantic_consistency",
                    detail: format!(
                        "label \"{label}\" maps to semantic ids {other_sem} (instance {other_id}) and {sem} (instance {id})"
                    ),
                });
            }
            _ => {}
        }
        match sem_label.get(&sem) {
            None => {
                sem_label.insert(sem, (label, id));
            }
            Some(&(other_label, other_id)) if other_label != label => {
                violations.push(Violation {
                    invariant: "semantic_consistency",
                    detail: format!(
                        "semantic id {sem} used by labels \"{other_label}\" (instance {other_id}) and \"{label}\" (instance {id})"
                    ),
                });
            }
            _ => {}
        }
    }
    violations
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("instance {0} has no points")]
    EmptyInstance(u32),
}

/// Build an [`ObjectNode`] for one instance: bbox is the exact componentwise
/// min/max of the instance's points, centroid the bbox center, level unset.
pub fn node_from_instance(scene: &ScenePointCloud, instance_id: u32) -> Result<ObjectNode, SceneError> {
    let label = scene
        .instances
        .get(&instance_id)
        .ok_or(SceneError::UnknownInstance(instance_id))?
        .clone();
    let bbox = Aabb::from_points(
        scene
            .points
            .iter()
            .filter(|p| p.instance_id == instance_id)
            .map(|p| p.position()),
    )
    .ok_or(SceneError::EmptyInstance(instance_id))?;
    let point_count = scene
        .points
        .iter()
        .filter(|p| p.instance_id == instance_id)
        .count();
    Ok(ObjectNode {
        id: instance_id,
        label,
        centroid: bbox.center(),
        bbox,
        level: None,
        point_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64, y: f64, z: f64, instance_id: u32, semantic_id: u32) -> PointRecord {
        PointRecord { x, y, z, r: 10, g: 20, b: 30, instance_id, semantic_id }
    }

    fn three_instance_scene() -> ScenePointCloud {
        ScenePointCloud {
            scene_id: "unit".into(),
            source_dataset: "test".into(),
            room_type: None,
            instances: BTreeMap::from([(0, "floor".into()), (1, "table".into()), (2, "cup".into())]),
            points: vec![
                point(0.0, 0.0, 0.0, 0, 0),
                point(4.0, 4.0, 0.05, 0, 0),
                point(1.0, 1.0, 0.05, 1, 1),
                point(2.0, 2.0, 0.8, 1, 1),
                point(1.4, 1.4, 0.8, 2, 2),
                point(1.6, 1.6, 0.9, 2, 2),
            ],
        }
    }

    #[test]
    fn well_formed_scene_has_no_violations() {
        assert!(validate_scene(&three_instance_scene()).is_empty());
    }

    #[test]
    fn undeclared_instance_is_reported_with_id() {
        let mut scene = three_instance_scene();
        scene.points[0].instance_id = 7;
        let violations = validate_scene(&scene);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].invariant, "instance_declared");
        assert!(violations[0].detail.contains('7'));
    }

    #[test]
    fn out_of_range_color_is_reported() {
        let mut scene = three_instance_scene();
        scene.points[1].r = 300;
        let violations = validate_scene(&scene);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].invariant, "color_range");
        assert!(violations[0].detail.contains("300"));
    }

    #[test]
    fn inconsistent_semantic_ids_are_reported() {
        let mut scene = three_instance_scene();
        scene.points[3].semantic_id = 9;
        let violations = validate_scene(&scene);
        assert!(violations.iter().any(|v| v.invariant == "semantic_consistency"));
    }

    #[test]
    fn node_bbox_is_min_max_and_centroid_is_center() {
        let scene = three_instance_scene();
        let node = node_from_instance(&scene, 1).unwrap();
        assert_eq!(node.bbox, Aabb::new([1.0, 1.0, 0.05], [2.0, 2.0, 0.8]));
        assert_eq!(node.centroid, [1.5, 1.5, 0.425]);
        assert_eq!(node.level, None);
        assert_eq!(node.point_count, 2);
    }

    #[test]
    fn singleton_instance_gives_degenerate_bbox() {
        let scene = ScenePointCloud {
            scene_id: "s".into(),
            source_dataset: "test".into(),
            room_type: None,
            instances: BTreeMap::from([(0, "mark".into())]),
            points: vec![point(1.0, 2.0, 3.0, 0, 0)],
        };
        let node = node_from_instance(&scene, 0).unwrap();
        assert_eq!(node.bbox.min, [1.0, 2.0, 3.0]);
        assert_eq!(node.bbox.max, [1.0, 2.0, 3.0]);
        assert_eq!(node.centroid, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn unknown_instance_errors_with_id() {
        let scene = three_instance_scene();
        let err = node_from_instance(&scene, 42).unwrap_err();
        assert!(err.to_string().contains("42"));
    }

    #[test]
    fn cup_centroid_matches_brute_force() {
        // Independent oracle: fold min/max over a generated fill of the cup box.
        let mut points = Vec::new();
        let (lo, hi) = ([1.4, 1.4, 0.8], [1.6, 1.6, 0.9]);
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..3 {
                    points.push(point(
                        lo[0] + (hi[0] - lo[0]) * i as f64 / 4.0,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / 4.0,
                        lo[2] + (hi[2] - lo[2]) * k as f64 / 2.0,
                        0,
                        0,
                    ));
                }
            }
        }
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in &points {
            for (k, v) in p.position().iter().enumerate() {
                min[k] = min[k].min(*v);
                max[k] = max[k].max(*v);
            }
        }
        let expected = [
            0.5 * (min[0] + max[0]),
            0.5 * (min[1] + max[1]),
            0.5 * (min[2] + max[2]),
        ];
        let scene = ScenePointCloud {
            scene_id: "cup".into(),
            source_dataset: "test".into(),
            room_type: None,
            instances: BTreeMap::from([(0, "cup".into())]),
            points,
        };
        let node = node_from_instance(&scene, 0).unwrap();
        assert_eq!(node.centroid, expected);
        assert!((node.centroid[0] - 1.5).abs() < 1e-12);
        assert!((node.centroid[1] - 1.5).abs() < 1e-12);
        assert!((node.centroid[2] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn relation_type_has_21_variants_and_round_trips() {
        assert_eq!(RelationType::ALL.len(), 21);
        for rel in RelationType::ALL {
            let parsed: RelationType = rel.canonical().parse().unwrap();
            assert_eq!(parsed, rel);
            let json = serde_json::to_string(&rel).unwrap();
            let back: RelationType = serde_json::from_str(&json).unwrap();
            assert_eq!(back, rel);
        }
        assert!("floating-over".parse::<RelationType>().is_err());
    }

    #[test]
    fn relation_categories_are_total() {
        use RelationCategory::*;
        let count = |cat: RelationCategory| {
            RelationType::ALL.iter().filter(|r| r.category() == cat).count()
        };
        assert_eq!(count(InContactVertical), 4);
        assert_eq!(count(NonContactVertical), 7);
        assert_eq!(count(Horizontal), 8);
        assert_eq!(count(MultiObject), 2);
    }

    #[test]
    fn containment_fraction_handles_degenerate_boxes() {
        let big = Aabb::new([0.0, 0.0, 0.0], [2.0, 2.0, 2.0]);
        let flat = Aabb::new([0.5, 0.5, 1.0], [1.5, 1.5, 1.0]);
        assert_eq!(flat.containment_fraction(&big), 1.0);
        let outside = Aabb::new([0.5, 0.5, 3.0], [1.5, 1.5, 3.0]);
        assert_eq!(outside.containment_fraction(&big), 0.0);
        let half = Aabb::new([1.0, 0.0, 0.0], [3.0, 2.0, 2.0]);
        assert!((half.containment_fraction(&big) - 0.5).abs() < 1e-12);
    }
}
