//! Keyframe interpolation to fixed-rate motion clips, padding, and
//! boundary-respecting window sampling over clip datasets.

use crate::math::{slerp_shortest, Quat, Vec3};
use crate::pose::KinematicPose;
use rand::Rng;
use thiserror::Error;

pub const CLIP_FPS: u32 = 20;

#[derive(Debug, Error)]
pub enum ClipError {
    #[error("keyframe sequence needs at least one pose")]
    EmptySequence,
    #[error("interval {index} is not positive ({value} s)")]
    NonPositiveInterval { index: usize, value: f64 },
    #[error("intervals length {intervals} must be poses length {poses} minus one")]
    LengthMismatch { poses: usize, intervals: usize },
    #[error("min_frames must be >= 1")]
    BadMinFrames,
    #[error("window {window} exceeds clip {clip:?} length {len}")]
    WindowTooLarge {
        window: usize,
        clip: String,
        len: usize,
    },
    #[error("dataset has no clips")]
    EmptyDataset,
    #[error("clip file parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A fixed-rate (20 fps) pose sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    pub fps: u32,
    pub frames: Vec<KinematicPose>,
    pub source_id: String,
}

impl MotionClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps as f64
    }
}

/// Number of frames an interval contributes: nearest integer to 20*t,
/// ties to even. The interval is re-timed to that count so the clip stays
/// on a strict 20 fps grid.
fn interval_frames(t: f64) -> usize {
    (CLIP_FPS as f64 * t).round_ties_even() as usize
}

/// Linear root interpolation and shortest-arc slerp per joint.
///
/// Each interval `t_i` contributes `round(20*t_i)` new frames; the shared
/// boundary keyframe is emitted exactly once. Keyframes are reproduced
/// bit-exactly at interval endpoints.
pub fn interpolate(
    poses: &[KinematicPose],
    intervals: &[f64],
    source_id: &str,
) -> Result<MotionClip, ClipError> {
    if poses.is_empty() {
        return Err(ClipError::EmptySequence);
    }
    if intervals.len() + 1 != poses.len() {
        return Err(ClipError::LengthMismatch {
            poses: poses.len(),
            intervals: intervals.len(),
        });
    }
    for (index, &value) in intervals.iter().enumerate() {
        if !(value > 0.0) {
            return Err(ClipError::NonPositiveInterval { index, value });
        }
    }

    let mut frames = Vec::with_capacity(1 + intervals.iter().map(|t| interval_frames(*t)).sum::<usize>());
    frames.push(poses[0].clone());
    for (i, &t) in intervals.iter().enumerate() {
        let a = &poses[i];
        let b = &poses[i + 1];
        let n = interval_frames(t);
        for k in 1..=n {
            if k == n {
                frames.push(b.clone());
            } else {
                frames.push(lerp_pose(a, b, k as f64 / n as f64));
            }
        }
    }
    Ok(MotionClip {
        fps: CLIP_FPS,
        frames,
        source_id: source_id.to_string(),
    })
}

fn lerp_pose(a: &KinematicPose, b: &KinematicPose, u: f64) -> KinematicPose {
    let root = a.root_translation * (1.0 - u) + b.root_translation * u;
    let rotations: Vec<Quat> = a
        .local_rotations()
        .iter()
        .zip(b.local_rotations())
        .map(|(qa, qb)| slerp_shortest(*qa, *qb, u))
        .collect();
    KinematicPose::new(root, rotations).expect("slerp of valid poses is valid")
}

/// Repeats the final frame until the clip has at least `min_frames` frames.
pub fn pad_clip(clip: &MotionClip, min_frames: usize) -> Result<MotionClip, ClipError> {
    if min_frames < 1 {
        return Err(ClipError::BadMinFrames);
    }
    let mut out = clip.clone();
    if let Some(last) = out.frames.last().cloned() {
        while out.frames.len() < min_frames {
            out.frames.push(last.clone());
        }
    }
    Ok(out)
}

/// A set of clips with their frame-index ranges in concatenated order.
#[derive(Debug, Clone)]
pub struct ClipDataset {
    clips: Vec<MotionClip>,
    boundaries: Vec<std::ops::Range<usize>>,
}

impl ClipDataset {
    pub fn new(clips: Vec<MotionClip>) -> Result<Self, ClipError> {
        if clips.is_empty() {
            return Err(ClipError::EmptyDataset);
        }
        let mut boundaries = Vec::with_capacity(clips.len());
        let mut start = 0;
        for clip in &clips {
            boundaries.push(start..start + clip.len());
            start += clip.len();
        }
        Ok(Self { clips, boundaries })
    }

    pub fn clips(&self) -> &[MotionClip] {
        &self.clips
    }

    pub fn boundaries(&self) -> &[std::ops::Range<usize>] {
        &self.boundaries
    }

    pub fn total_frames(&self) -> usize {
        self.boundaries.last().map(|r| r.end).unwrap_or(0)
    }
}

/// Uniformly samples a clip, then a window start such that
/// `[start, start+window)` stays inside that single clip.
pub fn sample_rollout_window<R: Rng>(
    dataset: &ClipDataset,
    window: usize,
    rng: &mut R,
) -> Result<(usize, usize), ClipError> {
    for (i, clip) in dataset.clips().iter().enumerate() {
        if clip.len() < window {
            return Err(ClipError::WindowTooLarge {
                window,
                clip: format!("#{i} ({})", clip.source_id),
                len: clip.len(),
            });
        }
    }
    let clip_id = rng.random_range(0..dataset.clips().len());
    let max_start = dataset.clips()[clip_id].len() - window;
    let start = rng.random_range(0..=max_start);
    Ok((clip_id, start))
}

// --- clip file ----------------------------------------------------------------
//
//   freemotion-clip v1
//   fps 20
//   frames <n>
//   joints <k> <name> ...
//   frame <i> <root xyz> <quat wxyz per joint> ...
//
// One line per frame; floats in shortest round-trip form, so
// write -> parse -> write is byte-identical.

pub fn write_clip(clip: &MotionClip, joint_names: &[String]) -> String {
    let mut out = String::from("freemotion-clip v1\n");
    out.push_str(&format!("source {}\n", clip.source_id));
    out.push_str(&format!("fps {}\n", clip.fps));
    out.push_str(&format!("frames {}\n", clip.frames.len()));
    out.push_str(&format!("joints {}", joint_names.len()));
    for name in joint_names {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for (i, frame) in clip.frames.iter().enumerate() {
        out.push_str(&format!(
            "frame {} {} {} {}",
            i, frame.root_translation.x, frame.root_translation.y, frame.root_translation.z
        ));
        for q in frame.local_rotations() {
            out.push_str(&format!(" {} {} {} {}", q.w, q.i, q.j, q.k));
        }
        out.push('\n');
    }
    out
}

pub fn parse_clip(text: &str) -> Result<(MotionClip, Vec<String>), ClipError> {
    let err = |line: usize, message: String| ClipError::Parse { line, message };
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, "freemotion-clip v1")) => {}
        other => {
            return Err(err(
                1,
                format!(
                    "expected header \"freemotion-clip v1\", found {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            ))
        }
    }
    let mut expect_kv = |key: &str| -> Result<(usize, Vec<String>), ClipError> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing {key} line")))?;
        let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if fields.first().map(String::as_str) != Some(key) {
            return Err(err(i + 1, format!("expected {key} line, found {line:?}")));
        }
        Ok((i + 1, fields))
    };
    let (_, source) = expect_kv("source")?;
    let source_id = source.get(1).cloned().unwrap_or_default();
    let (fps_line, fps_fields) = expect_kv("fps")?;
    let fps: u32 = fps_fields
        .get(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(fps_line, "bad fps".into()))?;
    let (frames_line, frame_fields) = expect_kv("frames")?;
    let frame_count: usize = frame_fields
        .get(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(frames_line, "bad frame count".into()))?;
    let (joints_line, joint_fields) = expect_kv("joints")?;
    let joint_count: usize = joint_fields
        .get(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(joints_line, "bad joint count".into()))?;
    let joint_names: Vec<String> = joint_fields[2..].to_vec();
    if joint_names.len() != joint_count {
        return Err(err(
            joints_line,
            format!(
                "joint count {} does not match {} names",
                joint_count,
                joint_names.len()
            ),
        ));
    }

    let mut frames = Vec::with_capacity(frame_count);
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() != Some(&"frame") {
            return Err(err(line_no, format!("expected frame line, found {line:?}")));
        }
        let expected = 2 + 3 + 4 * joint_count;
        if fields.len() != expected {
            return Err(err(
                line_no,
                format!("frame line needs {expected} fields, found {}", fields.len()),
            ));
        }
        let nums: Result<Vec<f64>, _> = fields[2..].iter().map(|s| s.parse::<f64>()).collect();
        let nums = nums.map_err(|e| err(line_no, format!("bad number: {e}")))?;
        let root = Vec3::new(nums[0], nums[1], nums[2]);
        let rotations: Vec<Quat> = (0..joint_count)
            .map(|j| {
                let base = 3 + 4 * j;
                Quat::new_normalize(nalgebra::Quaternion::new(
                    nums[base],
                    nums[base + 1],
                    nums[base + 2],
                    nums[base + 3],
                ))
            })
            .collect();
        frames.push(
            KinematicPose::new(root, rotations)
                .map_err(|e| err(line_no, format!("invalid pose: {e}")))?,
        );
    }
    if frames.len() != frame_count {
        return Err(err(
            0,
            format!("expected {frame_count} frames, found {}", frames.len()),
        ));
    }
    Ok((
        MotionClip {
            fps,
            frames,
            source_id,
        },
        joint_names,
    ))
}
