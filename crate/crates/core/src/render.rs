//! Deterministic software rasterizer for visual feedback images.
//!
//! Bones are drawn as 2-D line segments, joints as discs, and the world axes
//! as arrows at the origin (+x green, +z red). Output is a binary PPM so two
//! renders of the same inputs are byte-identical.

use crate::commands::CameraState;
use crate::math::Vec3;
use crate::pose::{forward_kinematics, KinematicPose, PoseError};
use crate::skeleton::SkeletonTopology;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageConfig {
    pub width: u32,
    pub height: u32,
    /// Vertical field of view, degrees.
    pub fov_deg: f64,
}

impl Default for ImageConfig {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            fov_deg: 60.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("image dimensions must be positive")]
    BadDimensions,
    #[error("camera radius must be positive")]
    DegenerateCamera,
    #[error(transparent)]
    Pose(#[from] PoseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB8.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            pixels.extend_from_slice(&color);
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn set(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let idx = ((y as u32 * self.width + x as u32) * 3) as usize;
        self.pixels[idx..idx + 3].copy_from_slice(&color);
    }

    /// Binary PPM (P6) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Perspective pinhole looking at the pelvis from the camera circle.
struct Projector {
    eye: Vec3,
    right: Vec3,
    up: Vec3,
    forward: Vec3,
    focal: f64,
    cx: f64,
    cy: f64,
}

impl Projector {
    fn new(camera: &CameraState, pelvis: Vec3, config: &ImageConfig) -> Self {
        let eye = camera.eye(pelvis);
        let forward = (pelvis - eye).normalize();
        let right = forward.cross(&Vec3::y()).normalize();
        let up = right.cross(&forward);
        let focal = (config.height as f64 / 2.0) / (config.fov_deg.to_radians() / 2.0).tan();
        Self {
            eye,
            right,
            up,
            forward,
            focal,
            cx: config.width as f64 / 2.0,
            cy: config.height as f64 / 2.0,
        }
    }

    /// Pixel coordinates, or `None` when the point is behind the camera.
    fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let d = p - self.eye;
        let depth = d.dot(&self.forward);
        if depth < 1e-3 {
            return None;
        }
        let x = self.cx + self.focal * d.dot(&self.right) / depth;
        let y = self.cy - self.focal * d.dot(&self.up) / depth;
        Some((x, y))
    }
}

fn draw_segment(img: &mut RasterImage, a: (f64, f64), b: (f64, f64), width: f64, color: [u8; 3]) {
    let (ax, ay) = a;
    let (bx, by) = b;
    let min_x = (ax.min(bx) - width).floor() as i64;
    let max_x = (ax.max(bx) + width).ceil() as i64;
    let min_y = (ay.min(by) - width).floor() as i64;
    let max_y = (ay.max(by) + width).ceil() as i64;
    let dx = bx - ax;
    let dy = by - ay;
    let len_sq = dx * dx + dy * dy;
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            let px = x as f64 + 0.5;
            let py = y as f64 + 0.5;
            let t = if len_sq < 1e-12 {
                0.0
            } else {
                (((px - ax) * dx + (py - ay) * dy) / len_sq).clamp(0.0, 1.0)
            };
            let qx = ax + t * dx;
            let qy = ay + t * dy;
            let dist = ((px - qx).powi(2) + (py - qy).powi(2)).sqrt();
            if dist <= width {
                img.set(x, y, color);
            }
        }
    }
}

fn draw_disc(img: &mut RasterImage, center: (f64, f64), radius: f64, color: [u8; 3]) {
    draw_segment(img, center, center, radius, color);
}

fn draw_arrow(img: &mut RasterImage, proj: &Projector, dir: Vec3, color: [u8; 3]) {
    let base = Vec3::zeros();
    let tip = dir * 0.5;
    let (Some(a), Some(b)) = (proj.project(base), proj.project(tip)) else {
        return;
    };
    draw_segment(img, a, b, 1.5, color);
    // Two short arrowhead barbs perpendicular to the shaft in screen space.
    let vx = b.0 - a.0;
    let vy = b.1 - a.1;
    let len = (vx * vx + vy * vy).sqrt();
    if len > 1e-9 {
        let (ux, uy) = (vx / len, vy / len);
        let (nx, ny) = (-uy, ux);
        for side in [-1.0, 1.0] {
            let end = (
                b.0 - 8.0 * ux + side * 5.0 * nx,
                b.1 - 8.0 * uy + side * 5.0 * ny,
            );
            draw_segment(img, b, end, 1.5, color);
        }
    }
}

const BACKGROUND: [u8; 3] = [24, 26, 30];
const BONE: [u8; 3] = [215, 215, 220];
const JOINT: [u8; 3] = [240, 170, 60];
const X_AXIS: [u8; 3] = [40, 200, 60]; // green: +x
const Z_AXIS: [u8; 3] = [220, 50, 50]; // red: +z

/// Renders the pose from the camera; deterministic for identical inputs.
pub fn render_view(
    topology: &SkeletonTopology,
    pose: &KinematicPose,
    camera: &CameraState,
    config: &ImageConfig,
) -> Result<RasterImage, RenderError> {
    if config.width == 0 || config.height == 0 {
        return Err(RenderError::BadDimensions);
    }
    if !(camera.radius > 0.0) {
        return Err(RenderError::DegenerateCamera);
    }
    let transforms = forward_kinematics(topology, pose)?;
    let proj = Projector::new(camera, transforms[0].position, config);
    let mut img = RasterImage::filled(config.width, config.height, BACKGROUND);

    draw_arrow(&mut img, &proj, Vec3::x(), X_AXIS);
    draw_arrow(&mut img, &proj, Vec3::z(), Z_AXIS);

    for (i, joint) in topology.joints().iter().enumerate() {
        if let Some(p) = joint.parent {
            if let (Some(a), Some(b)) = (
                proj.project(transforms[p].position),
                proj.project(transforms[i].position),
            ) {
                draw_segment(&mut img, a, b, 2.0, BONE);
            }
        }
    }
    for t in &transforms {
        if let Some(c) = proj.project(t.position) {
            draw_disc(&mut img, c, 3.5, JOINT);
        }
    }
    Ok(img)
}

/// Projected pixel centers of every joint (None when behind the camera).
pub fn projected_joint_centers(
    topology: &SkeletonTopology,
    pose: &KinematicPose,
    camera: &CameraState,
    config: &ImageConfig,
) -> Result<Vec<Option<(f64, f64)>>, RenderError> {
    if !(camera.radius > 0.0) {
        return Err(RenderError::DegenerateCamera);
    }
    let transforms = forward_kinematics(topology, pose)?;
    let proj = Projector::new(camera, transforms[0].position, config);
    Ok(transforms.iter().map(|t| proj.project(t.position)).collect())
}
