//! Multi-view object captioning: project object points into posed images,
//! score visibility, crop, collect candidate captions, select the best and
//! summarize them into one caption.

mod camera;
mod clients;
mod project;

pub use camera::{cameras_from_json_str, cameras_to_json_string, load_cameras, look_at, Camera};
pub use clients::{
    CaptionClient, CaptionRequest, HttpVisionClient, ScoreClient, ScoreRequest, StubCaptioner,
    StubScorer, StubSummarizer, SummaryClient,
};
pub use project::{crop_rect, occlusion_score, project_points, visible_points, PixelRect, Projected};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::ScenePointCloud;

#[derive(Debug, Error)]
pub enum CaptionError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("camera file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("instance {0} has no points")]
    EmptyInstance(u32),
    #[error("object never visible: instance {0} has zero visible points in every view")]
    NeverVisible(u32),
    #[error("all views failed for instance {0}: every client call errored")]
    AllViewsFailed(u32),
}

/// One scored caption candidate from one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionCandidate {
    pub view_id: usize,
    pub text: String,
    pub s_clip: f64,
    pub s_occ: f64,
    pub crop: PixelRect,
}

impl CaptionCandidate {
    pub fn combined(&self) -> f64 {
        self.s_clip * self.s_occ
    }
}

/// Candidate ranking rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// rank by s_clip * s_occ
    #[default]
    Product,
    /// rank by s_clip, then s_occ
    Lexicographic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CaptionConfig {
    /// depth buffer cell size in pixels
    pub zbuf_res: u32,
    /// crop padding as a fraction of each dimension
    pub crop_margin: f64,
    pub top_k: usize,
    pub selection: SelectionMode,
}

impl Default for CaptionConfig {
    fn default() -> Self {
        CaptionConfig { zbuf_res: 1, crop_margin: 0.05, top_k: 10, selection: SelectionMode::Product }
    }
}

fn rank(candidates: &mut [CaptionCandidate], mode: SelectionMode) {
    match mode {
        SelectionMode::Product => candidates.sort_by(|a, b| {
            b.combined()
                .total_cmp(&a.combined())
                .then(b.s_occ.total_cmp(&a.s_occ))
                .then(a.view_id.cmp(&b.view_id))
        }),
        SelectionMode::Lexicographic => candidates.sort_by(|a, b| {
            b.s_clip
                .total_cmp(&a.s_clip)
                .then(b.s_occ.total_cmp(&a.s_occ))
                .then(a.view_id.cmp(&b.view_id))
        }),
    }
}

/// Top-k candidates by combined score, ties broken by higher occlusion score
/// then lower view id.
pub fn select_candidates(
    candidates: &[CaptionCandidate],
    k: usize,
    mode: SelectionMode,
) -> Vec<CaptionCandidate> {
    let mut sorted = candidates.to_vec();
    rank(&mut sorted, mode);
    sorted.truncate(k);
    sorted
}

/// Result of captioning one object: the summary plus the full ranked
/// candidate audit (of which the first `summarized` entered the summary).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectCaption {
    pub object_id: u32,
    pub label: String,
    pub text: String,
    pub candidates: Vec<CaptionCandidate>,
    pub summarized: usize,
    /// views dropped because a client call failed
    pub dropped_views: Vec<usize>,
}

/// Run the full captioning pipeline for one object.
///
/// Per view: project, z-buffer visibility, occlusion score, crop, caption,
/// clip-score. Views with zero visibility are skipped before any client
/// call; client failures drop the view and continue. The ranked top-k texts
/// go to the summarizer.
#[allow(clippy::too_many_arguments)]
pub fn caption_object(
    object_id: u32,
    scene: &ScenePointCloud,
    cameras: &[Camera],
    captioner: &dyn CaptionClient,
    scorer: &dyn ScoreClient,
    summarizer: &dyn SummaryClient,
    cfg: &CaptionConfig,
) -> Result<ObjectCaption, CaptionError> {
    let label = scene
        .instances
        .get(&object_id)
        .ok_or(CaptionError::UnknownInstance(object_id))?
        .clone();
    let object_points: Vec<[f64; 3]> = scene
        .points
        .iter()
        .filter(|p| p.instance_id == object_id)
        .map(|p| p.position())
        .collect();
    if object_points.is_empty() {
        return Err(CaptionError::EmptyInstance(object_id));
    }
    let scene_points: Vec<[f64; 3]> = scene.points.iter().map(|p| p.position()).collect();

    let mut candidates = Vec::new();
    let mut dropped_views = Vec::new();
    let mut ever_visible = false;
    for (view_id, cam) in cameras.iter().enumerate() {
        cam.validate()?;
        let visible = visible_points(&object_points, &scene_points, cam, cfg.zbuf_res);
        let s_occ = occlusion_score(object_points.len(), visible.len());
        if s_occ == 0.0 {
            continue;
        }
        ever_visible = true;
        let visible_world: Vec<[f64; 3]> = visible.iter().map(|&i| object_points[i]).collect();
        let projected = project_points(&visible_world, cam);
        let crop = crop_rect(&projected, cam.width, cam.height, cfg.crop_margin)
            .expect("visible points project");
        let caption_req = CaptionRequest {
            image_ref: &cam.image_ref,
            crop,
            object_label: &label,
            view_id,
        };
        let text = match captioner.caption(&caption_req) {
            Ok(text) => text,
            Err(_) => {
                dropped_views.push(view_id);
                continue;
            }
        };
        let score_req = ScoreRequest { text: &text, image_ref: &cam.image_ref, crop, view_id };
        let s_clip = match scorer.score(&score_req) {
            Ok(score) => score.clamp(0.0, 1.0),
            Err(_) => {
                dropped_views.push(view_id);
                continue;
            }
        };
        candidates.push(CaptionCandidate { view_id, text, s_clip, s_occ, crop });
    }

    if !ever_visible {
        return Err(CaptionError::NeverVisible(object_id));
    }
    if candidates.is_empty() {
        return Err(CaptionError::AllViewsFailed(object_id));
    }
    rank(&mut candidates, cfg.selection);
    let summarized = cfg.top_k.min(candidates.len());
    let texts: Vec<String> = candidates[..summarized].iter().map(|c| c.text.clone()).collect();
    let text = summarizer
        .summarize(&texts, &label)
        .unwrap_or_else(|_| texts.join(" "));
    Ok(ObjectCaption {
        object_id,
        label,
        text,
        candidates,
        summarized,
        dropped_views,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MAT4_IDENTITY;
    use crate::scene::PointRecord;
    use std::collections::BTreeMap;

    fn candidate(view_id: usize, s_clip: f64, s_occ: f64) -> CaptionCandidate {
        CaptionCandidate {
            view_id,
            text: format!("view {view_id}"),
            s_clip,
            s_occ,
            crop: PixelRect { x0: 0, y0: 0, x1: 1, y1: 1 },
        }
    }

    #[test]
    fn under_k_returns_all_sorted() {
        let cands = vec![candidate(0, 0.5, 0.5), candidate(1, 0.9, 0.9), candidate(2, 0.6, 0.6)];
        let top = select_candidates(&cands, 10, SelectionMode::Product);
        assert_eq!(top.len(), 3);
        assert_eq!(top[0].view_id, 1);
    }

    #[test]
    fn product_beats_single_factor() {
        // products 0.45 vs 0.54: the second ranks first
        let cands = vec![candidate(0, 0.9, 0.5), candidate(1, 0.6, 0.9)];
        let top = select_candidates(&cands, 2, SelectionMode::Product);
        assert_eq!(top[0].view_id, 1);
        // the lexicographic variant prefers the higher clip score
        let top = select_candidates(&cands, 2, SelectionMode::Lexicographic);
        assert_eq!(top[0].view_id, 0);
    }

    #[test]
    fn equal_products_break_on_occlusion_then_view_id() {
        let cands = vec![candidate(0, 0.6, 0.8), candidate(1, 0.8, 0.6)];
        let top = select_candidates(&cands, 2, SelectionMode::Product);
        assert_eq!(top[0].view_id, 0, "higher s_occ wins the tie");
        let cands = vec![candidate(5, 0.7, 0.7), candidate(2, 0.7, 0.7)];
        let top = select_candidates(&cands, 2, SelectionMode::Product);
        assert_eq!(top[0].view_id, 2, "lower view id wins the full tie");
    }

    #[test]
    fn selection_output_products_are_non_increasing() {
        let cands: Vec<CaptionCandidate> = (0..20)
            .map(|i| candidate(i, 0.3 + 0.03 * (i as f64 % 7.0), 0.2 + 0.04 * (i as f64 % 5.0)))
            .collect();
        let top = select_candidates(&cands, 20, SelectionMode::Product);
        for pair in top.windows(2) {
            assert!(pair[0].combined() >= pair[1].combined());
        }
    }

    fn cup_scene() -> ScenePointCloud {
        let mut points = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                points.push(PointRecord {
                    x: -0.2 + 0.1 * i as f64,
                    y: -0.2 + 0.1 * j as f64,
                    z: 2.0,
                    r: 200,
                    g: 40,
                    b: 40,
                    instance_id: 0,
                    semantic_id: 0,
                });
            }
        }
        ScenePointCloud {
            scene_id: "cup".into(),
            source_dataset: "test".into(),
            room_type: None,
            instances: BTreeMap::from([(0, "cup".into())]),
            points,
        }
    }

    fn front_camera() -> Camera {
        Camera {
            fx: 100.0,
            fy: 100.0,
            cx: 64.0,
            cy: 64.0,
            width: 128,
            height: 128,
            extrinsics: MAT4_IDENTITY,
            image_ref: "view0".into(),
        }
    }

    #[test]
    fn stub_pipeline_produces_a_caption() {
        let scene = cup_scene();
        let mut captioner = StubCaptioner::default();
        captioner.canned.insert(0, "a red cup".into());
        let result = caption_object(
            0,
            &scene,
            &[front_camera()],
            &captioner,
            &StubScorer::default(),
            &StubSummarizer,
            &CaptionConfig::default(),
        )
        .unwrap();
        assert!(result.text.contains("a red cup"));
        assert_eq!(result.candidates.len(), 1);
        assert_eq!(result.candidates[0].s_occ, 1.0);
    }

    #[test]
    fn twelve_views_summarize_exactly_ten() {
        let scene = cup_scene();
        let cameras: Vec<Camera> = (0..12)
            .map(|i| {
                let mut cam = front_camera();
                cam.image_ref = format!("view{i}");
                cam
            })
            .collect();
        let result = caption_object(
            0,
            &scene,
            &cameras,
            &StubCaptioner::default(),
            &StubScorer::default(),
            &StubSummarizer,
            &CaptionConfig::default(),
        )
        .unwrap();
        assert_eq!(result.candidates.len(), 12);
        assert_eq!(result.summarized, 10);
    }

    #[test]
    fn fully_occluded_object_errors() {
        let mut scene = cup_scene();
        // occluder instance: a dense wall at z = 1 in front of the cup
        scene.instances.insert(1, "wall".into());
        for i in 0..40 {
            for j in 0..40 {
                scene.points.push(PointRecord {
                    x: -0.4 + 0.02 * i as f64,
                    y: -0.4 + 0.02 * j as f64,
                    z: 1.0,
                    r: 10,
                    g: 10,
                    b: 10,
                    instance_id: 1,
                    semantic_id: 1,
                });
            }
        }
        let err = caption_object(
            0,
            &scene,
            &[front_camera()],
            &StubCaptioner::default(),
            &StubScorer::default(),
            &StubSummarizer,
            &CaptionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CaptionError::NeverVisible(0)));
    }
}
