//! Posed pinhole cameras and their JSON file form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CaptionError;
use crate::ingest::{mat4_apply, Mat4};

/// A posed pinhole camera: intrinsics in pixels, world-to-camera extrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// world-to-camera, row-major
    pub extrinsics: Mat4,
    pub image_ref: String,
}

fn det3(m: &Mat4) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Camera {
    pub fn validate(&self) -> Result<(), CaptionError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(CaptionError::InvalidCamera(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(CaptionError::InvalidCamera("zero image dimensions".into()));
        }
        if det3(&self.extrinsics).abs() < 1e-12 {
            return Err(CaptionError::InvalidCamera("extrinsics are not invertible".into()));
        }
        Ok(())
    }

    pub fn world_to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        mat4_apply(&self.extrinsics, p)
    }
}

#[derive(Serialize, Deserialize)]
struct CameraJson {
    image: String,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    extrinsics: Vec<f64>,
}

/// Load a camera list file: a JSON array of poses with 16-number row-major
/// extrinsics.
pub fn load_cameras(path: &Path) -> Result<Vec<Camera>, CaptionError> {
    let text = std::fs::read_to_string(path).map_err(|source| CaptionError::Io {
        path: PathBuf::from(path),
        source,
    })?;
    cameras_from_json_str(&text).map_err(|message| CaptionError::Parse {
        path: PathBuf::from(path),
        message,
    })
}

pub fn cameras_from_json_str(text: &str) -> Result<Vec<Camera>, String> {
    let raw: Vec<CameraJson> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut cameras = Vec::with_capacity(raw.len());
    for (idx, c) in raw.into_iter().enumerate() {
        if c.extrinsics.len() != 16 {
            return Err(format!(
                "camera {idx}: extrinsics must hold 16 numbers, got {}",
                c.extrinsics.len()
            ));
        }
        let mut extrinsics = [[0.0; 4]; 4];
        for (i, chunk) in c.extrinsics.chunks(4).enumerate() {
            extrinsics[i].copy_from_slice(chunk);
        }
        let camera = Camera {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            extrinsics,
            image_ref: c.image,
        };
        camera.validate().map_err(|e| format!("camera {idx}: {e}"))?;
        cameras.push(camera);
    }
    Ok(cameras)
}

pub fn cameras_to_json_string(cameras: &[Camera]) -> String {
    let raw: Vec<CameraJson> = cameras
        .iter()
        .map(|c| CameraJson {
            image: c.image_ref.clone(),
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            extrinsics: c.extrinsics.iter().flatten().copied().collect(),
        })
        .collect();
    serde_json::to_string_pretty(&raw).expect("camera serialization cannot fail")
}

/// A camera at `eye` looking at `at` (up = +Z), returning world-to-camera
/// extrinsics with camera axes x=right, y=down, z=forward.
pub fn look_at(eye: [f64; 3], at: [f64; 3], image_ref: &str) -> Camera {
    let forward = normalize([at[0] - eye[0], at[1] - eye[1], at[2] - eye[2]]);
    let world_up = [0.0, 0.0, 1.0];
    let right = normalize(cross(forward, world_up));
    let down = cross(forward, right);
    let rotation = [right, down, forward];
    let mut extrinsics = [[0.0; 4]; 4];
    for (i, axis) in rotation.iter().enumerate() {
        extrinsics[i][..3].copy_from_slice(axis);
        extrinsics[i][3] = -(axis[0] * eye[0] + axis[1] * eye[1] + axis[2] * eye[2]);
    }
    extrinsics[3] = [0.0, 0.0, 0.0, 1.0];
    Camera {
        fx: 220.0,
        fy: 220.0,
        cx: 128.0,
        cy: 128.0,
        width: 256,
        height: 256,
        extrinsics,
        image_ref: image_ref.to_string(),
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n < 1e-12 {
        return [1.0, 0.0, 0.0];
    }
    [v[0] / n, v[1] / n, v[2] / n]
}
