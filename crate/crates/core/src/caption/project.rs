//! Pinhole projection, point-splat z-buffer visibility, crop rectangles.

use super::camera::Camera;

/// Depth slack absorbing floating-point ties between an object's own points.
const DEPTH_TOLERANCE: f64 = 1e-4;

/// One projected point: pixel coordinates and camera-space depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

fn project_one(p: [f64; 3], cam: &Camera) -> Option<Projected> {
    let [x, y, z] = cam.world_to_camera(p);
    if z <= 0.0 {
        return None;
    }
    let u = cam.fx * x / z + cam.cx;
    let v = cam.fy * y / z + cam.cy;
    if u < 0.0 || u >= cam.width as f64 || v < 0.0 || v >= cam.height as f64 {
        return None;
    }
    Some(Projected { u, v, depth: z })
}

/// Project world points through the pinhole model; points behind the camera
/// or outside the image are excluded.
pub fn project_points(points: &[[f64; 3]], cam: &Camera) -> Vec<Projected> {
    points.iter().filter_map(|&p| project_one(p, cam)).collect()
}

/// Point-splat depth buffer over the whole scene at a cell size of
/// `zbuf_res` pixels; nearest depth per cell wins.
struct DepthBuffer {
    cells_x: usize,
    depths: Vec<f64>,
    res: f64,
}

impl DepthBuffer {
    fn build(scene_points: &[[f64; 3]], cam: &Camera, zbuf_res: u32) -> Self {
        let res = zbuf_res.max(1) as f64;
        let cells_x = (cam.width as f64 / res).ceil() as usize;
        let cells_y = (cam.height as f64 / res).ceil() as usize;
        let mut depths = vec![f64::INFINITY; cells_x * cells_y];
        for &p in scene_points {
            if let Some(proj) = project_one(p, cam) {
                let cx = (proj.u / res) as usize;
                let cy = (proj.v / res) as usize;
                let cell = &mut depths[cy * cells_x + cx];
                if proj.depth < *cell {
                    *cell = proj.depth;
                }
            }
        }
        DepthBuffer { cells_x, depths, res }
    }

    fn depth_at(&self, u: f64, v: f64) -> f64 {
        let cx = (u / self.res) as usize;
        let cy = (v / self.res) as usize;
        self.depths[cy * self.cells_x + cx]
    }
}

/// Indices of the object points visible in this view: a point is visible iff
/// it projects into the image and its depth is within tolerance of the
/// scene-wide depth buffer at its pixel.
pub fn visible_points(
    object_points: &[[f64; 3]],
    scene_points: &[[f64; 3]],
    cam: &Camera,
    zbuf_res: u32,
) -> Vec<usize> {
    let buffer = DepthBuffer::build(scene_points, cam, zbuf_res);
    object_points
        .iter()
        .enumerate()
        .filter_map(|(idx, &p)| {
            let proj = project_one(p, cam)?;
            (proj.depth <= buffer.depth_at(proj.u, proj.v) + DEPTH_TOLERANCE).then_some(idx)
        })
        .collect()
}

/// Occlusion score: fraction of the object's points that are visible.
pub fn occlusion_score(total_points: usize, visible: usize) -> f64 {
    assert!(total_points >= 1, "occlusion score needs at least one point");
    visible as f64 / total_points as f64
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl PixelRect {
    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }
}

/// Tight pixel bounds of the projected points, padded by `margin` (a fraction
/// of each dimension, rounded up) and clamped to the image.
pub fn crop_rect(projected: &[Projected], width: u32, height: u32, margin: f64) -> Option<PixelRect> {
    let first = projected.first()?;
    let (mut min_u, mut max_u, mut min_v, mut max_v) = (first.u, first.u, first.v, first.v);
    for p in &projected[1..] {
        min_u = min_u.min(p.u);
        max_u = max_u.max(p.u);
        min_v = min_v.min(p.v);
        max_v = max_v.max(p.v);
    }
    let mut rect = PixelRect {
        x0: min_u.floor() as i64,
        y0: min_v.floor() as i64,
        x1: max_u.floor() as i64,
        y1: max_v.floor() as i64,
    };
    if margin > 0.0 {
        let pad_x = (margin * rect.width() as f64).ceil() as i64;
        let pad_y = (margin * rect.height() as f64).ceil() as i64;
        rect.x0 -= pad_x;
        rect.x1 += pad_x;
        rect.y0 -= pad_y;
        rect.y1 += pad_y;
    }
    Some(PixelRect {
        x0: rect.x0.clamp(0, width as i64 - 1),
        y0: rect.y0.clamp(0, height as i64 - 1),
        x1: rect.x1.clamp(0, width as i64 - 1),
        y1: rect.y1.clamp(0, height as i64 - 1),
    })
}
