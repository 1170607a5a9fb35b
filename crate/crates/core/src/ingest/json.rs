//! Canonical JSON scene format.
//!
//! ```json
//! {"scene_id": "...", "source_dataset": "...", "room_type": null,
//!  "instances": {"0": "floor"},
//!  "points": [[x, y, z, r, g, b, instance_id, semantic_id], ...]}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::scene::{PointRecord, ScenePointCloud};

#[derive(Serialize, Deserialize)]
struct SceneJson {
    scene_id: String,
    source_dataset: String,
    room_type: Option<String>,
    instances: BTreeMap<String, String>,
    points: Vec<(f64, f64, f64, i32, i32, i32, u32, u32)>,
}

fn parse_err(path: &Path, e: &serde_json::Error) -> IngestError {
    IngestError::Parse {
        path: path.to_path_buf(),
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

pub(super) fn load(path: &Path) -> Result<ScenePointCloud, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    scene_from_json_str(&text).map_err(|e| match e {
        JsonSceneError::Syntax(err) => parse_err(path, &err),
        JsonSceneError::BadInstanceKey(key) => IngestError::Parse {
            path: path.to_path_buf(),
            location: "instances".into(),
            message: format!("instance key \"{key}\" is not a non-negative integer"),
        },
    })
}

/// Errors from decoding the canonical JSON scene form.
#[derive(Debug, thiserror::Error)]
pub enum JsonSceneError {
    #[error(transparent)]
    Syntax(serde_json::Error),
    #[error("instance key \"{0}\" is not a non-negative integer")]
    BadInstanceKey(String),
}

/// Decode a scene from canonical JSON text.
pub fn scene_from_json_str(text: &str) -> Result<ScenePointCloud, JsonSceneError> {
    let raw: SceneJson = serde_json::from_str(text).map_err(JsonSceneError::Syntax)?;
    let mut instances = BTreeMap::new();
    for (key, label) in raw.instances {
        let id: u32 = key.parse().map_err(|_| JsonSceneError::BadInstanceKey(key.clone()))?;
        instances.insert(id, label);
    }
    let points = raw
        .points
        .into_iter()
        .map(|(x, y, z, r, g, b, instance_id, semantic_id)| PointRecord {
            x,
            y,
            z,
            r,
            g,
            b,
            instance_id,
            semantic_id,
        })
        .collect();
    Ok(ScenePointCloud {
        scene_id: raw.scene_id,
        source_dataset: raw.source_dataset,
        room_type: raw.room_type,
        instances,
        points,
    })
}

/// Encode a scene as canonical JSON (compact, keys in canonical order).
pub fn scene_to_json_string(scene: &ScenePointCloud) -> String {
    let raw = SceneJson {
        scene_id: scene.scene_id.clone(),
        source_dataset: scene.source_dataset.clone(),
        room_type: scene.room_type.clone(),
        instances: scene
            .instances
            .iter()
            .map(|(id, label)| (id.to_string(), label.clone()))
            .collect(),
        points: scene
            .points
            .iter()
            .map(|p| (p.x, p.y, p.z, p.r, p.g, p.b, p.instance_id, p.semantic_id))
            .collect(),
    };
    serde_json::to_string(&raw).expect("scene serialization cannot fail")
}

/// Write a scene file in canonical JSON.
pub fn scene_to_json_file(scene: &ScenePointCloud, path: &Path) -> Result<(), IngestError> {
    std::fs::write(path, scene_to_json_string(scene)).map_err(|source| IngestError::Io {
        path: PathBuf::from(path),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_scene, SceneFormat};
    use crate::scene::validate_scene;

    const MINIMAL: &str = r#"{
        "scene_id": "mini",
        "source_dataset": "unit",
        "room_type": "bedroom",
        "instances": {"0": "floor", "1": "bed"},
        "points": [
            [0.0, 0.0, 0.0, 10, 20, 30, 0, 0],
            [1.0, 2.0, 0.5, 40, 50, 60, 1, 1]
        ]
    }"#;

    #[test]
    fn decodes_minimal_scene() {
        let scene = scene_from_json_str(MINIMAL).ok().unwrap();
        assert_eq!(scene.points.len(), 2);
        assert_eq!(scene.instances[&1], "bed");
        assert_eq!(scene.room_type.as_deref(), Some("bedroom"));
        assert!(validate_scene(&scene).is_empty());
    }

    #[test]
    fn round_trips_through_string_form() {
        let scene = scene_from_json_str(MINIMAL).ok().unwrap();
        let text = scene_to_json_string(&scene);
        let again = scene_from_json_str(&text).ok().unwrap();
        assert_eq!(scene, again);
    }

    #[test]
    fn load_rejects_undeclared_instance_reference() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let text = MINIMAL.replace("[1.0, 2.0, 0.5, 40, 50, 60, 1, 1]", "[1.0, 2.0, 0.5, 40, 50, 60, 9, 1]");
        std::fs::write(&path, text).unwrap();
        let err = load_scene(&path, SceneFormat::Json).unwrap_err();
        match err {
            IngestError::Invalid(violations) => {
                assert!(violations.iter().any(|v| v.detail.contains('9')));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn syntax_error_carries_line_info() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.json");
        std::fs::write(&path, "{\"scene_id\": \"x\",\n  \"points\": oops}").unwrap();
        let err = load_scene(&path, SceneFormat::Json).unwrap_err();
        match err {
            IngestError::Parse { location, .. } => assert!(location.contains("line 2")),
            other => panic!("expected parse error, got {other}"),
        }
    }
}
