//! Scene loading and preprocessing: subsampling, normalization, semantic
//! alignment, filtering.
//!
//! All operations are pure; a scene can be pushed through
//! load -> subsample -> normalize -> align_semantics -> filter on one worker
//! with no shared state.

mod json;
mod ply;

pub use json::{scene_from_json_str, scene_to_json_file, scene_to_json_string, JsonSceneError};

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{validate_scene, Aabb, ScenePointCloud, Violation};
use crate::seed::rng_for;

/// Preprocessing thresholds and inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub max_points: usize,
    pub min_objects: usize,
    pub max_extent_m: f64,
    pub seed: u64,
    pub label_map_path: Option<PathBuf>,
    pub floor_labels: BTreeSet<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            max_points: 240_000,
            min_objects: 4,
            max_extent_m: 25.0,
            seed: 0,
            label_map_path: None,
            floor_labels: BTreeSet::from(["floor".to_string()]),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: PathBuf,
        /// `line N` for text inputs, `byte N` for binary ones.
        location: String,
        message: String,
    },
    #[error("scene failed validation: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("cannot subsample to {max_points} points: scene has {instances} instances")]
    CapBelowInstanceCount { max_points: usize, instances: usize },
    #[error("no floor: no instance labeled with any of the configured floor labels")]
    NoFloor,
    #[error("degenerate floor: XY extent {0:.6} x {1:.6} m")]
    DegenerateFloor(f64, f64),
    #[error("unrecognized scene format for {0} (expected .json or .ply)")]
    UnknownFormat(PathBuf),
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// On-disk scene formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneFormat {
    Json,
    Ply,
}

impl SceneFormat {
    pub fn from_path(path: &Path) -> Option<SceneFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Some(SceneFormat::Json),
            Some("ply") => Some(SceneFormat::Ply),
            _ => None,
        }
    }
}

/// Load a scene file and validate it; any invariant violation is an error.
pub fn load_scene(path: &Path, format: SceneFormat) -> Result<ScenePointCloud, IngestError> {
    let scene = match format {
        SceneFormat::Json => json::load(path)?,
        SceneFormat::Ply => ply::load(path)?,
    };
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(IngestError::Invalid(violations));
    }
    Ok(scene)
}

/// Load a scene, inferring the format from the file extension.
pub fn load_scene_auto(path: &Path) -> Result<ScenePointCloud, IngestError> {
    let format = SceneFormat::from_path(path).ok_or_else(|| IngestError::UnknownFormat(path.to_path_buf()))?;
    load_scene(path, format)
}

/// Uniform seeded subsample without replacement, capped at `max_points`.
///
/// Scenes at or under the cap are returned unchanged. One seeded pick per
/// instance is reserved first so no instance goes extinct; the remaining
/// budget is filled uniformly from the rest. Point order is preserved.
pub fn subsample(scene: &ScenePointCloud, max_points: usize, seed: u64) -> Result<ScenePointCloud, IngestError> {
    assert!(max_points >= 1, "max_points must be >= 1");
    if scene.points.len() <= max_points {
        return Ok(scene.clone());
    }
    let mut by_instance: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (idx, p) in scene.points.iter().enumerate() {
        by_instance.entry(p.instance_id).or_default().push(idx);
    }
    if max_points < by_instance.len() {
        return Err(IngestError::CapBelowInstanceCount {
            max_points,
            instances: by_instance.len(),
        });
    }
    let mut rng = rng_for(seed, &["subsample", &scene.scene_id]);
    let mut reserved = BTreeSet::new();
    for indices in by_instance.values() {
        reserved.insert(indices[rng.random_range(0..indices.len())]);
    }
    let pool: Vec<usize> = (0..scene.points.len()).filter(|i| !reserved.contains(i)).collect();
    let remaining = max_points - reserved.len();
    let mut keep: Vec<usize> = reserved.into_iter().collect();
    for pick in index_sample(&mut rng, pool.len(), remaining) {
        keep.push(pool[pick]);
    }
    keep.sort_unstable();
    Ok(ScenePointCloud {
        scene_id: scene.scene_id.clone(),
        source_dataset: scene.source_dataset.clone(),
        room_type: scene.room_type.clone(),
        instances: scene.instances.clone(),
        points: keep.into_iter().map(|i| scene.points[i]).collect(),
    })
}

/// Row-major 4x4 homogeneous transform.
pub type Mat4 = [[f64; 4]; 4];

pub const MAT4_IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat4_apply(m: &Mat4, p: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, v) in out.iter_mut().enumerate() {
        *v = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + m[i][3];
    }
    out
}

/// Center the scene on the floor and align the room layout with the axes.
///
/// The translation moves the floor AABB's XY center and top Z to the origin.
/// When the floor's Y extent dominates, the scene is rotated by -90 degrees
/// about Z so the longer side lies along +X; ties keep the identity rotation.
/// Returns the transformed scene and the exact transform applied.
pub fn normalize(
    scene: &ScenePointCloud,
    floor_labels: &BTreeSet<String>,
) -> Result<(ScenePointCloud, Mat4), IngestError> {
    let floor_ids: BTreeSet<u32> = scene
        .instances
        .iter()
        .filter(|(_, label)| floor_labels.contains(*label))
        .map(|(id, _)| *id)
        .collect();
    if floor_ids.is_empty() {
        return Err(IngestError::NoFloor);
    }
    let floor_bbox = Aabb::from_points(
        scene
            .points
            .iter()
            .filter(|p| floor_ids.contains(&p.instance_id))
            .map(|p| p.position()),
    )
    .ok_or(IngestError::NoFloor)?;
    let [ex, ey, _] = floor_bbox.size();
    if ex <= f64::EPSILON || ey <= f64::EPSILON {
        return Err(IngestError::DegenerateFloor(ex, ey));
    }
    let center = floor_bbox.center();
    let translation: Mat4 = [
        [1.0, 0.0, 0.0, -center[0]],
        [0.0, 1.0, 0.0, -center[1]],
        [0.0, 0.0, 1.0, -floor_bbox.max[2]],
        [0.0, 0.0, 0.0, 1.0],
    ];
    // Rotation by -90 deg about Z maps +Y onto +X.
    let rotation: Mat4 = if ey > ex {
        [
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    } else {
        MAT4_IDENTITY
    };
    let transform = mat4_mul(&rotation, &translation);
    let points = scene
        .points
        .iter()
        .map(|p| {
            let [x, y, z] = mat4_apply(&transform, p.position());
            crate::scene::PointRecord { x, y, z, ..*p }
        })
        .collect();
    Ok((
        ScenePointCloud {
            scene_id: scene.scene_id.clone(),
            source_dataset: scene.source_dataset.clone(),
            room_type: scene.room_type.clone(),
            instances: scene.instances.clone(),
            points,
        },
        transform,
    ))
}

/// Outcome of applying a label map to a scene.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RemapReport {
    /// source label -> canonical label actually applied
    pub mapped: BTreeMap<String, String>,
    /// labels with no mapping, kept verbatim
    pub unmapped: Vec<String>,
    /// canonical vocabulary the semantic ids are indexed against
    pub vocabulary: Vec<String>,
}

/// Replace instance labels through `label_map` (unmapped labels kept verbatim)
/// and re-index semantic ids against the sorted vocabulary of final labels.
pub fn align_semantics(
    scene: &ScenePointCloud,
    label_map: &BTreeMap<String, String>,
) -> (ScenePointCloud, RemapReport) {
    let mut report = RemapReport::default();
    let mut unmapped = BTreeSet::new();
    let mut instances = BTreeMap::new();
    for (&id, label) in &scene.instances {
        match label_map.get(label) {
            Some(canonical) => {
                report.mapped.insert(label.clone(), canonical.clone());
                instances.insert(id, canonical.clone());
            }
            None => {
                unmapped.insert(label.clone());
                instances.insert(id, label.clone());
            }
        }
    }
    report.unmapped = unmapped.into_iter().collect();
    let vocabulary: Vec<String> = instances
        .values()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index_of: BTreeMap<&str, u32> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32))
        .collect();
    let points = scene
        .points
        .iter()
        .map(|p| {
            let semantic_id = instances
                .get(&p.instance_id)
                .and_then(|label| index_of.get(label.as_str()))
                .copied()
                .unwrap_or(p.semantic_id);
            crate::scene::PointRecord { semantic_id, ..*p }
        })
        .collect();
    report.vocabulary = vocabulary;
    (
        ScenePointCloud {
            scene_id: scene.scene_id.clone(),
            source_dataset: scene.source_dataset.clone(),
            room_type: scene.room_type.clone(),
            instances,
            points,
        },
        report,
    )
}

/// Keep/reject decision from [`filter_scene`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "lowercase")]
pub enum FilterDecision {
    Keep,
    Reject { rule: String, value: f64 },
}

impl FilterDecision {
    pub fn is_keep(&self) -> bool {
        matches!(self, FilterDecision::Keep)
    }
}

/// Reject scenes with too few non-floor objects or an oversized XY diagonal.
pub fn filter_scene(scene: &ScenePointCloud, cfg: &IngestConfig) -> FilterDecision {
    let populated: BTreeSet<u32> = scene.points.iter().map(|p| p.instance_id).collect();
    let object_count = scene
        .instances
        .iter()
        .filter(|(id, label)| populated.contains(id) && !cfg.floor_labels.contains(*label))
        .count();
    if object_count < cfg.min_objects {
        return FilterDecision::Reject {
            rule: "min_objects".into(),
            value: object_count as f64,
        };
    }
    if let Some(bounds) = scene.bounds() {
        let [ex, ey, _] = bounds.size();
        let diagonal = (ex * ex + ey * ey).sqrt();
        if diagonal > cfg.max_extent_m {
            return FilterDecision::Reject {
                rule: "max_extent".into(),
                value: diagonal,
            };
        }
    }
    FilterDecision::Keep
}

/// Read a label map file: a JSON object of source label -> canonical label.
pub fn load_label_map(path: &Path) -> Result<BTreeMap<String, String>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        path: path.to_path_buf(),
        location: format!("line {}", e.line()),
        message: e.to_string(),
    })
}
