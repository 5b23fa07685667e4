//! Height-field terrain and egocentric height-map observations.

use freemotion_core::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("cell size must be positive")]
    BadCell,
    #[error("height grid must be non-empty and finite")]
    BadHeights,
    #[error("height field parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Regular height grid over the horizontal (x, z) plane, +y up.
///
/// `heights[row][col]` is the height at
/// `(origin.x + col * cell, origin.z + row * cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub origin: [f64; 2],
    pub cell: f64,
    heights: Vec<Vec<f64>>,
}

impl HeightField {
    pub fn new(origin: [f64; 2], cell: f64, heights: Vec<Vec<f64>>) -> Result<Self, TerrainError> {
        if !(cell > 0.0) {
            return Err(TerrainError::BadCell);
        }
        if heights.is_empty() || heights[0].is_empty() {
            return Err(TerrainError::BadHeights);
        }
        let w = heights[0].len();
        if heights
            .iter()
            .any(|row| row.len() != w || row.iter().any(|h| !h.is_finite()))
        {
            return Err(TerrainError::BadHeights);
        }
        Ok(Self {
            origin,
            cell,
            heights,
        })
    }

    /// A single-cell flat field covering everything through border clamping.
    pub fn flat(height: f64) -> Self {
        Self::new([0.0, 0.0], 1.0, vec![vec![height; 2]; 2]).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.heights.len()
    }

    pub fn cols(&self) -> usize {
        self.heights[0].len()
    }

    pub fn heights(&self) -> &Vec<Vec<f64>> {
        &self.heights
    }

    /// Bilinear height at (x, z); coordinates outside the extent clamp to the
    /// border. Returns the height and whether clamping occurred.
    pub fn sample(&self, x: f64, z: f64) -> (f64, bool) {
        let max_col = (self.cols() - 1) as f64;
        let max_row = (self.rows() - 1) as f64;
        let u = (x - self.origin[0]) / self.cell;
        let v = (z - self.origin[1]) / self.cell;
        let clamped = u < 0.0 || v < 0.0 || u > max_col || v > max_row;
        let u = u.clamp(0.0, max_col);
        let v = v.clamp(0.0, max_row);
        let c0 = u.floor() as usize;
        let r0 = v.floor() as usize;
        let c1 = (c0 + 1).min(self.cols() - 1);
        let r1 = (r0 + 1).min(self.rows() - 1);
        let fu = u - c0 as f64;
        let fv = v - r0 as f64;
        let h00 = self.heights[r0][c0];
        let h01 = self.heights[r0][c1];
        let h10 = self.heights[r1][c0];
        let h11 = self.heights[r1][c1];
        let h = h00 * (1.0 - fu) * (1.0 - fv)
            + h01 * fu * (1.0 - fv)
            + h10 * (1.0 - fu) * fv
            + h11 * fu * fv;
        (h, clamped)
    }

    /// Height ignoring the clamp flag.
    pub fn height_at(&self, x: f64, z: f64) -> f64 {
        self.sample(x, z).0
    }
}

/// Geometry of the egocentric observation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationConfig {
    pub grid_w: usize,
    pub grid_h: usize,
    /// Side length of the sampled square, meters.
    pub extent: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            grid_w: 16,
            grid_h: 16,
            extent: 2.0,
        }
    }
}

impl ObservationConfig {
    pub fn len(&self) -> usize {
        self.grid_w * self.grid_h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flattened pelvis-relative height samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub values: Vec<f64>,
}

/// Samples a yaw-aligned, pelvis-centered grid of terrain heights relative
/// to the pelvis height (row-major; rows sweep back-to-front along the
/// heading, columns right-to-left).
///
/// Returns the observation and the count of samples that fell outside the
/// field extent (clamped to the border).
pub fn sample_height_observation(
    field: &HeightField,
    pelvis: Vec3,
    heading_deg: f64,
    config: &ObservationConfig,
) -> (ObservationVector, usize) {
    let mut values = Vec::with_capacity(config.len());
    let mut clamped_count = 0;
    let heading = heading_deg.to_radians();
    let (sin, cos) = heading.sin_cos();
    let half = config.extent / 2.0;
    for r in 0..config.grid_h {
        // v: back (-half) to front (+half) along the heading.
        let v = if config.grid_h == 1 {
            0.0
        } else {
            -half + config.extent * r as f64 / (config.grid_h - 1) as f64
        };
        for c in 0..config.grid_w {
            let u = if config.grid_w == 1 {
                0.0
            } else {
                -half + config.extent * c as f64 / (config.grid_w - 1) as f64
            };
            // Rotate the local offset (u: lateral toward +x at zero heading,
            // v: forward toward +z at zero heading) by the heading about +y.
            let x = pelvis.x + u * cos + v * sin;
            let z = pelvis.z - u * sin + v * cos;
            let (h, clamped) = field.sample(x, z);
            if clamped {
                clamped_count += 1;
            }
            values.push(h - pelvis.y);
        }
    }
    (ObservationVector { values }, clamped_count)
}

// --- height field file ----------------------------------------------------------
//
//   freemotion-heightfield v1
//   origin <x> <z>
//   cell <size>
//   size <rows> <cols>
//   row <h> <h> ...

pub fn write_heightfield(field: &HeightField) -> String {
    let mut out = String::from("freemotion-heightfield v1\n");
    out.push_str(&format!("origin {} {}\n", field.origin[0], field.origin[1]));
    out.push_str(&format!("cell {}\n", field.cell));
    out.push_str(&format!("size {} {}\n", field.rows(), field.cols()));
    for row in field.heights() {
        out.push_str("row");
        for h in row {
            out.push(' ');
            out.push_str(&h.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_heightfield(text: &str) -> Result<HeightField, TerrainError> {
    let err = |line: usize, message: String| TerrainError::Parse { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "freemotion-heightfield v1")) => {}
        other => {
            return Err(err(
                1,
                format!(
                    "expected header \"freemotion-heightfield v1\", found {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            ))
        }
    }
    let mut origin = [0.0; 2];
    let mut cell = 0.0;
    let mut rows_cols = (0usize, 0usize);
    let mut heights: Vec<Vec<f64>> = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        match fields.first() {
            None => continue,
            Some(&"origin") if fields.len() == 3 => {
                origin[0] = fields[1]
                    .parse()
                    .map_err(|e| err(line_no, format!("bad origin: {e}")))?;
                origin[1] = fields[2]
                    .parse()
                    .map_err(|e| err(line_no, format!("bad origin: {e}")))?;
            }
            Some(&"cell") if fields.len() == 2 => {
                cell = fields[1]
                    .parse()
                    .map_err(|e| err(line_no, format!("bad cell: {e}")))?;
            }
            Some(&"size") if fields.len() == 3 => {
                rows_cols = (
                    fields[1]
                        .parse()
                        .map_err(|e| err(line_no, format!("bad size: {e}")))?,
                    fields[2]
                        .parse()
                        .map_err(|e| err(line_no, format!("bad size: {e}")))?,
                );
            }
            Some(&"row") => {
                let row: Result<Vec<f64>, _> =
                    fields[1..].iter().map(|s| s.parse::<f64>()).collect();
                heights.push(row.map_err(|e| err(line_no, format!("bad height: {e}")))?);
            }
            _ => return Err(err(line_no, format!("unexpected line {raw:?}"))),
        }
    }
    if heights.len() != rows_cols.0 || heights.iter().any(|r| r.len() != rows_cols.1) {
        return Err(err(0, "size line does not match row data".into()));
    }
    HeightField::new(origin, cell, heights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_config() -> ObservationConfig {
        ObservationConfig::default()
    }

    #[test]
    fn flat_field_gives_constant_offset() {
        let field = HeightField::flat(0.0);
        let (obs, _) =
            sample_height_observation(&field, Vec3::new(0.0, 0.9, 0.0), 0.0, &flat_config());
        assert_eq!(obs.values.len(), 256);
        for v in &obs.values {
            assert_relative_eq!(*v, -0.9, epsilon = 1e-12);
        }
        let raised = HeightField::flat(0.3);
        let (obs, _) =
            sample_height_observation(&raised, Vec3::new(0.0, 0.9, 0.0), 0.0, &flat_config());
        for v in &obs.values {
            assert_relative_eq!(*v, -0.6, epsilon = 1e-12);
        }
    }

    /// 0.2 m step covering the forward (+z) half of the world.
    fn step_field() -> HeightField {
        let mut heights = vec![vec![0.0; 81]; 81];
        for (r, row) in heights.iter_mut().enumerate() {
            let z = -4.0 + r as f64 * 0.1;
            for h in row.iter_mut() {
                if z > 0.05 {
                    *h = 0.2;
                }
            }
        }
        HeightField::new([-4.0, -4.0], 0.1, heights).unwrap()
    }

    #[test]
    fn forward_step_appears_in_forward_half_and_flips_with_heading() {
        let config = flat_config();
        let field = step_field();
        let pelvis = Vec3::new(0.0, 0.9, 0.0);
        let (obs, _) = sample_height_observation(&field, pelvis, 0.0, &config);
        let half = config.len() / 2;
        // Rear rows first: forward half entries sit 0.2 above rear half.
        let rear_mean: f64 = obs.values[..half].iter().sum::<f64>() / half as f64;
        let front_mean: f64 = obs.values[half..].iter().sum::<f64>() / half as f64;
        assert_relative_eq!(front_mean - rear_mean, 0.2, epsilon = 0.02);

        let (flipped, _) = sample_height_observation(&field, pelvis, 180.0, &config);
        for r in 0..config.grid_h {
            for c in 0..config.grid_w {
                let mirror =
                    (config.grid_h - 1 - r) * config.grid_w + (config.grid_w - 1 - c);
                assert_relative_eq!(
                    obs.values[r * config.grid_w + c],
                    flipped.values[mirror],
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn observation_is_translation_and_height_equivariant() {
        let field = step_field();
        let config = flat_config();
        let pelvis = Vec3::new(0.2, 0.9, -0.3);
        let (base, _) = sample_height_observation(&field, pelvis, 30.0, &config);

        // Raise field and pelvis together.
        let raised_heights: Vec<Vec<f64>> = field
            .heights()
            .iter()
            .map(|row| row.iter().map(|h| h + 0.5).collect())
            .collect();
        let raised = HeightField::new(field.origin, field.cell, raised_heights).unwrap();
        let (obs, _) = sample_height_observation(
            &raised,
            pelvis + Vec3::new(0.0, 0.5, 0.0),
            30.0,
            &config,
        );
        for (a, b) in base.values.iter().zip(&obs.values) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }

        // Translate field and pelvis together.
        let moved = HeightField::new(
            [field.origin[0] + 1.5, field.origin[1] - 0.7],
            field.cell,
            field.heights().clone(),
        )
        .unwrap();
        let (obs, _) = sample_height_observation(
            &moved,
            pelvis + Vec3::new(1.5, 0.0, -0.7),
            30.0,
            &config,
        );
        for (a, b) in base.values.iter().zip(&obs.values) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn out_of_extent_samples_are_counted() {
        let field = HeightField::new([0.0, 0.0], 0.1, vec![vec![0.0; 4]; 4]).unwrap();
        let (_, clamped) =
            sample_height_observation(&field, Vec3::new(50.0, 1.0, 50.0), 0.0, &flat_config());
        assert_eq!(clamped, 256);
    }

    #[test]
    fn heightfield_file_round_trips() {
        let field = step_field();
        let text = write_heightfield(&field);
        let parsed = parse_heightfield(&text).unwrap();
        assert_eq!(parsed, field);
        assert_eq!(write_heightfield(&parsed), text);
    }

    #[test]
    fn bad_header_is_reported() {
        assert!(matches!(
            parse_heightfield("oops"),
            Err(TerrainError::Parse { line: 1, .. })
        ));
    }
}
