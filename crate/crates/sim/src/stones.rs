//! Stepping-stone course generation and rasterization.

use crate::terrain::{HeightField, TerrainError};
use freemotion_core::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoneError {
    #[error("stone spacing d must be positive")]
    BadSpacing,
    #[error("stone radius must be positive")]
    BadRadius,
    #[error("a course needs at least 2 stones")]
    BadCount,
    #[error(transparent)]
    Terrain(#[from] TerrainError),
}

/// Per-step course parameters: pitch, yaw, and spacing of each stone
/// relative to the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteppingStoneParams {
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    /// Center-to-center distance, meters.
    pub spacing: f64,
    pub stone_radius: f64,
    pub count: usize,
}

impl SteppingStoneParams {
    pub fn validate(&self) -> Result<(), StoneError> {
        if !(self.spacing > 0.0) {
            return Err(StoneError::BadSpacing);
        }
        if !(self.stone_radius > 0.0) {
            return Err(StoneError::BadRadius);
        }
        if self.count < 2 {
            return Err(StoneError::BadCount);
        }
        Ok(())
    }
}

/// Stone centers. The first stone sits at the origin; step k heads along +x
/// rotated by the cumulative yaw `k * yaw_deg` about +y, rising by
/// `spacing * sin(pitch)` and advancing `spacing * cos(pitch)` horizontally.
pub fn generate_stepping_stones(params: &SteppingStoneParams) -> Result<Vec<Vec3>, StoneError> {
    params.validate()?;
    let pitch = params.pitch_deg.to_radians();
    let dy = params.spacing * pitch.sin();
    let horiz = params.spacing * pitch.cos();
    let mut stones = Vec::with_capacity(params.count);
    let mut cur = Vec3::zeros();
    stones.push(cur);
    for k in 0..params.count - 1 {
        let yaw = (k as f64 * params.yaw_deg).to_radians();
        // R_y(yaw) applied to +x.
        let dir = Vec3::new(yaw.cos(), 0.0, -yaw.sin());
        cur += dir * horiz + Vec3::new(0.0, dy, 0.0);
        stones.push(cur);
    }
    Ok(stones)
}

/// Rasterizes a stone course: cells within `stone_radius` (horizontally) of
/// a stone center take that stone's height (nearest stone wins, ties go to
/// the lower index); everything else is `gap_depth`.
pub fn course_to_heightfield(
    stones: &[Vec3],
    stone_radius: f64,
    gap_depth: f64,
    cell: f64,
) -> Result<HeightField, StoneError> {
    if stones.is_empty() {
        return Err(StoneError::BadCount);
    }
    if !(stone_radius > 0.0) {
        return Err(StoneError::BadRadius);
    }
    let margin = stone_radius + 1.0;
    let min_x = stones.iter().map(|s| s.x).fold(f64::INFINITY, f64::min) - margin;
    let max_x = stones.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max) + margin;
    let min_z = stones.iter().map(|s| s.z).fold(f64::INFINITY, f64::min) - margin;
    let max_z = stones.iter().map(|s| s.z).fold(f64::NEG_INFINITY, f64::max) + margin;
    let cols = ((max_x - min_x) / cell).ceil() as usize + 1;
    let rows = ((max_z - min_z) / cell).ceil() as usize + 1;
    let mut heights = vec![vec![gap_depth; cols]; rows];
    for (r, row) in heights.iter_mut().enumerate() {
        let z = min_z + r as f64 * cell;
        for (c, h) in row.iter_mut().enumerate() {
            let x = min_x + c as f64 * cell;
            let mut best: Option<(f64, f64)> = None; // (distance, height)
            for stone in stones {
                let d = ((x - stone.x).powi(2) + (z - stone.z).powi(2)).sqrt();
                if d <= stone_radius {
                    // Strict < keeps the lower-index stone on ties.
                    if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                        best = Some((d, stone.y));
                    }
                }
            }
            if let Some((_, height)) = best {
                *h = height;
            }
        }
    }
    Ok(HeightField::new([min_x, min_z], cell, heights)?)
}
